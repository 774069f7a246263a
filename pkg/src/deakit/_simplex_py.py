"""Pure-Python simplex kernel.

Reference implementation of the pivoting loop; `deakit._simplex_core` is a
compiled mirror with identical arithmetic and tie-breaking, so both kernels
walk the same pivot sequence on the same tableau.
"""

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


def run_simplex(tableau, basis, iteration, iter_cap, pivot_tol, opt_tol,
                bland_after, log=None, phase=0):
    """Run primal simplex pivots on a tableau until an exit condition.

    `tableau` is (rows+1) x (cols+1): constraint rows, then the reduced-cost
    row; the last column is the right-hand side.  Both `tableau` and `basis`
    are updated in place.  Entering column follows Dantzig's rule, switching
    to Bland's rule after `bland_after` consecutive degenerate pivots.
    Returns (status, total iteration count).
    """
    T = tableau
    n_rows = T.shape[0] - 1
    n_cols = T.shape[1] - 1
    red = T[n_rows]
    degenerate_run = 0
    while True:
        if degenerate_run >= bland_after:
            col = -1
            for j in range(n_cols):
                if red[j] < -opt_tol:
                    col = j
                    break
        else:
            col = int(np.argmin(red[:n_cols]))
            if red[col] >= -opt_tol:
                col = -1
        if col < 0:
            return OPTIMAL, iteration
        if iteration >= iter_cap:
            return ITERATION_LIMIT, iteration

        # Ratio test; ties broken on the smaller basis index (Bland-safe).
        row = -1
        best = 0.0
        for i in range(n_rows):
            a = T[i, col]
            if a > pivot_tol:
                ratio = T[i, n_cols] / a
                if row < 0 or ratio < best or (ratio == best
                                               and basis[i] < basis[row]):
                    row = i
                    best = ratio
        if row < 0:
            return UNBOUNDED, iteration
        if log is not None:
            log.write(f"[phase{phase}] it={iteration} enter=x{col} "
                      f"leave=x{basis[row]} ratio={best:.6g}\n")
        degenerate_run = degenerate_run + 1 if best <= pivot_tol else 0

        prow = T[row]
        prow /= T[row, col]
        coef = T[:, col].copy()
        coef[row] = 0.0
        T -= np.outer(coef, prow)
        basis[row] = col
        iteration += 1
