#!/usr/bin/env python3
"""Time the compiled simplex kernel against the pure-python fallback.

Builds Charnes-Cooper SBM programs over random DMU panels (the wide,
short LPs this package actually solves) and times `linprog.solve` with
each kernel on identical instances.  Both kernels pivot identically, so
the objectives must agree bitwise; the run aborts if they do not.
"""

import argparse
import time

import numpy as np

from deakit import (Dataset, Indicator, ModelKind, ModelSpec, Role,
                    build_instance, linearize_sbm, linprog)
from deakit.errors import SolverError


def sbm_lps(n_dmus: int, n_inputs: int, seed: int, per_panel: int = 4):
    """Charnes-Cooper LPs for the first few DMUs of a random panel."""
    rng = np.random.default_rng(seed)
    names = tuple(f"u{i + 1}" for i in range(n_dmus))
    indicators = tuple(
        [Indicator(f"x{i + 1}", Role.INPUT) for i in range(n_inputs)]
        + [Indicator("yg", Role.DESIRABLE),
           Indicator("yb", Role.UNDESIRABLE)])
    values = rng.uniform(0.5, 10.0, size=(n_dmus, n_inputs + 2))
    d = Dataset(names, indicators, values)
    spec = ModelSpec(ModelKind.SBM_UNDESIRABLE)
    return [linearize_sbm(build_instance(d, dmu, spec))[0]
            for dmu in names[:per_panel]]


def time_kernel(lps, kernel: str, repeats: int) -> float:
    """Best per-solve seconds over `repeats` passes (first pass warms up)."""
    best = float("inf")
    for _ in range(repeats + 1):
        t0 = time.perf_counter()
        for lp in lps:
            linprog.solve(lp, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return best / len(lps)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[10, 25, 50, 100],
                        help="panel sizes (DMU counts) to benchmark")
    parser.add_argument("--inputs", type=int, default=4,
                        help="inputs per DMU (plus 1 good and 1 bad output)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed passes per size; the best is kept")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    try:
        linprog.solve(sbm_lps(4, 2, 0, per_panel=1)[0], kernel="cython")
        have_cython = True
    except SolverError:
        have_cython = False
        print("compiled kernel not available; timing python only\n")

    header = f"{'DMUs':>6} {'vars':>6} {'python':>12}"
    if have_cython:
        header += f" {'cython':>12} {'speedup':>8}"
    print(header)
    for n in args.sizes:
        lps = sbm_lps(n, args.inputs, args.seed)
        n_vars = lps[0].A.shape[1]
        t_py = time_kernel(lps, "python", args.repeats)
        line = f"{n:>6} {n_vars:>6} {t_py * 1e6:>10.1f}us"
        if have_cython:
            for lp in lps:
                py = linprog.solve(lp, kernel="python")
                cy = linprog.solve(lp, kernel="cython")
                if py.objective != cy.objective:
                    raise SystemExit(f"kernel mismatch on {n}-DMU panel: "
                                     f"{py.objective!r} != {cy.objective!r}")
            t_cy = time_kernel(lps, "cython", args.repeats)
            line += f" {t_cy * 1e6:>10.1f}us {t_py / t_cy:>7.1f}x"
        print(line)
    print(f"\nactive default backend: {linprog.simplex_backend()}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
