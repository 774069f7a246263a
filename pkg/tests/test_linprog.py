import dataclasses
import io

import numpy as np
import pytest

from deakit import LPSolution, SolverError, StandardFormLP, Status, solve, \
    verify_optimality
from oracles import lp_enum_min, random_bounded_lp


def example_lp() -> StandardFormLP:
    # min -x - y  s.t.  x + y + s1 = 2,  x + 2y + s2 = 3
    return StandardFormLP(np.array([-1.0, -1.0, 0.0, 0.0]),
                          np.array([[1.0, 1.0, 1.0, 0.0],
                                    [1.0, 2.0, 0.0, 1.0]]),
                          np.array([2.0, 3.0]))


def test_single_constraint():
    lp = StandardFormLP(np.array([-1.0, 0.0]),
                        np.array([[1.0, 1.0]]), np.array([1.0]))
    sol = solve(lp)
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(-1.0, abs=1e-9)
    assert sol.primal[0] == pytest.approx(1.0, abs=1e-9)


def test_contradictory_equalities_infeasible():
    lp = StandardFormLP(np.array([0.0]),
                        np.array([[1.0], [1.0]]), np.array([1.0, 2.0]))
    assert solve(lp).status is Status.INFEASIBLE


def test_two_variable_example_matches_enumeration():
    lp = example_lp()
    sol = solve(lp)
    assert sol.status is Status.OPTIMAL
    best, _ = lp_enum_min(lp)
    assert best == pytest.approx(-2.0, abs=1e-12)
    assert sol.objective == pytest.approx(best, abs=1e-9)


def test_unbounded():
    # min -x with x - s = 0: the ray x = s -> infinity
    lp = StandardFormLP(np.array([-1.0, 0.0]),
                        np.array([[1.0, -1.0]]), np.array([0.0]))
    assert solve(lp).status is Status.UNBOUNDED


def test_iteration_limit_status():
    lp = example_lp()
    sol = solve(lp, iter_cap=1)
    assert sol.status is Status.ITERATION_LIMIT


def test_iter_cap_env_override(monkeypatch):
    monkeypatch.setenv("DEA_ITER_CAP", "1")
    assert solve(example_lp()).status is Status.ITERATION_LIMIT
    monkeypatch.delenv("DEA_ITER_CAP")
    assert solve(example_lp()).status is Status.OPTIMAL


@pytest.mark.parametrize("seed", range(60))
def test_enumeration_equivalence(seed):
    lp = random_bounded_lp(seed)
    sol = solve(lp)
    assert sol.status is Status.OPTIMAL
    best, _ = lp_enum_min(lp)
    assert best is not None
    assert sol.objective == pytest.approx(best, abs=1e-7)


@pytest.mark.parametrize("seed", range(20))
def test_scale_covariance(seed):
    lp = random_bounded_lp(seed)
    base = solve(lp)
    rng = np.random.default_rng(seed)
    row = int(rng.integers(0, lp.n_constraints))
    scale = float(rng.uniform(0.1, 50.0))
    A = lp.A.copy()
    b = lp.b.copy()
    A[row] *= scale
    b[row] *= scale
    scaled = solve(StandardFormLP(lp.c, A, b))
    assert scaled.status is base.status is Status.OPTIMAL
    np.testing.assert_allclose(scaled.primal, base.primal, atol=1e-7)


@pytest.mark.parametrize("seed", range(40))
def test_every_optimal_passes_certificate(seed):
    lp = random_bounded_lp(seed)
    sol = solve(lp)
    assert sol.status is Status.OPTIMAL
    assert verify_optimality(lp, sol)


def test_certificate_rejects_perturbed_primal():
    lp = example_lp()
    sol = solve(lp)
    bad = np.array(sol.primal)
    bad[int(sol.basis[0])] += 1e-3
    assert not verify_optimality(lp, dataclasses.replace(sol, primal=bad))


def test_certificate_rejects_nonoptimal_vertex():
    lp = example_lp()
    # vertex x=0, y=1.5 (objective -1.5) with basis {y, s1}
    basis = (1, 2)
    B = lp.A[:, basis]
    xb = np.linalg.solve(B, lp.b)
    primal = np.zeros(lp.n_vars)
    primal[list(basis)] = xb
    vertex = LPSolution(status=Status.OPTIMAL,
                        objective=float(lp.c @ primal),
                        primal=primal, basis=basis, iterations=0)
    assert not verify_optimality(lp, vertex)


def test_certificate_singular_basis():
    lp = example_lp()
    sol = solve(lp)
    dup = dataclasses.replace(sol, basis=(0, 0))
    with pytest.raises(SolverError, match="basis not invertible"):
        verify_optimality(lp, dup)


def test_solution_invariants_on_random_lps():
    for seed in range(30):
        lp = random_bounded_lp(seed + 500)
        sol = solve(lp)
        assert sol.status is Status.OPTIMAL
        assert sol.primal.min(initial=0.0) >= -1e-9
        resid = np.max(np.abs(lp.A @ sol.primal - lp.b), initial=0.0)
        assert resid <= 1e-7 * (1.0 + np.max(np.abs(lp.b), initial=0.0))
        obj = float(lp.c @ sol.primal)
        assert abs(obj - sol.objective) <= 1e-9 * (1.0 + abs(sol.objective))


def test_determinism_same_input():
    lp = random_bounded_lp(7)
    a = solve(lp)
    b = solve(lp)
    assert a.status is b.status
    assert a.iterations == b.iterations
    assert a.basis == b.basis
    assert np.array_equal(a.primal, b.primal)
    assert a.objective == b.objective


def test_validation_rejects_bad_shapes():
    with pytest.raises(SolverError):
        StandardFormLP(np.array([1.0]), np.array([[1.0, 2.0]]),
                       np.array([1.0]))
    with pytest.raises(SolverError):
        StandardFormLP(np.array([1.0, np.nan]),
                       np.array([[1.0, 2.0]]), np.array([1.0]))
    with pytest.raises(SolverError):
        StandardFormLP(np.array([1.0, 1.0]),
                       np.array([[1.0, np.inf]]), np.array([1.0]))


def test_degenerate_lp_terminates():
    # highly degenerate: many tied basic feasible solutions at the origin
    A = np.array([[1.0, 1.0, 1.0, 0.0, 0.0],
                  [1.0, 2.0, 0.0, 1.0, 0.0],
                  [2.0, 1.0, 0.0, 0.0, 1.0]])
    b = np.zeros(3)
    c = np.array([-1.0, -1.0, 0.0, 0.0, 0.0])
    sol = solve(StandardFormLP(c, A, b))
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(0.0, abs=1e-9)


def test_debug_log_stream():
    lp = example_lp()
    stream = io.StringIO()
    sol = solve(lp, log=stream)
    assert sol.status is Status.OPTIMAL
    text = stream.getvalue()
    assert "enter=" in text and "[phase1]" in text
    plain = solve(lp)
    assert np.array_equal(sol.primal, plain.primal)


def test_redundant_row_is_dropped():
    # second row duplicates the first; solver must still find the optimum
    A = np.array([[1.0, 1.0, 1.0],
                  [2.0, 2.0, 2.0]])
    b = np.array([1.0, 2.0])
    c = np.array([-1.0, 0.0, 0.0])
    sol = solve(StandardFormLP(c, A, b))
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(-1.0, abs=1e-9)
