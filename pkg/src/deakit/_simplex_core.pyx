# cython: language_level=3
"""Compiled simplex kernel; semantics mirror `deakit._simplex_py` exactly.

The pivot update multiplies then subtracts (no fused ops; compiled with
-ffp-contract=off) so the tableau stays bit-identical to the numpy kernel.
"""


cpdef tuple run_simplex(double[:, ::1] tableau, long long[::1] basis,
                        long long iteration, long long iter_cap,
                        double pivot_tol, double opt_tol,
                        long long bland_after):
    cdef Py_ssize_t n_rows = tableau.shape[0] - 1
    cdef Py_ssize_t n_cols = tableau.shape[1] - 1
    cdef Py_ssize_t i, j, col, row
    cdef long long degenerate_run = 0
    cdef double a, ratio, best, piv, f

    while True:
        col = -1
        if degenerate_run >= bland_after:
            for j in range(n_cols):
                if tableau[n_rows, j] < -opt_tol:
                    col = j
                    break
        else:
            col = 0
            for j in range(1, n_cols):
                if tableau[n_rows, j] < tableau[n_rows, col]:
                    col = j
            if tableau[n_rows, col] >= -opt_tol:
                col = -1
        if col < 0:
            return 0, iteration  # optimal
        if iteration >= iter_cap:
            return 2, iteration  # iteration limit

        row = -1
        best = 0.0
        for i in range(n_rows):
            a = tableau[i, col]
            if a > pivot_tol:
                ratio = tableau[i, n_cols] / a
                if row < 0 or ratio < best or (ratio == best
                                               and basis[i] < basis[row]):
                    row = i
                    best = ratio
        if row < 0:
            return 1, iteration  # unbounded

        degenerate_run = degenerate_run + 1 if best <= pivot_tol else 0

        piv = tableau[row, col]
        for j in range(n_cols + 1):
            tableau[row, j] = tableau[row, j] / piv
        for i in range(n_rows + 1):
            if i == row:
                continue
            f = tableau[i, col]
            if f != 0.0:
                for j in range(n_cols + 1):
                    tableau[i, j] = tableau[i, j] - f * tableau[row, j]
        basis[row] = col
        iteration += 1
