"""DEA models: output-oriented CCR and the SBM with undesirable outputs.

Both models score a DMU against the production possibility set spanned by
all observed DMUs under an intensity-sum constraint L <= e lambda <= U
(CRS: L=0 with no upper row; VRS: L=U=1).  CCR expands desirable outputs
radially and scores 1/phi*; the SBM score is the slack ratio rho*, made
linear with the Charnes-Cooper transform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linprog
from .dataset import Dataset, Role, validate
from .errors import DataError, ModelError, SolverError
from .linprog import StandardFormLP, Status


class ModelKind(enum.Enum):
    CCR_OUTPUT = "ccr"
    SBM_UNDESIRABLE = "sbm-u"


@dataclass(frozen=True)
class ReturnsToScale:
    """Intensity-sum bounds; `upper` may be math.inf (row omitted)."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper):
            raise ModelError(f"invalid returns-to-scale bounds "
                             f"L={self.lower}, U={self.upper}")

    @classmethod
    def crs(cls) -> "ReturnsToScale":
        return cls(0.0, math.inf)

    @classmethod
    def vrs(cls) -> "ReturnsToScale":
        return cls(1.0, 1.0)

    @classmethod
    def custom(cls, lower: float, upper: float) -> "ReturnsToScale":
        return cls(lower, upper)


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    returns_to_scale: ReturnsToScale = field(default_factory=ReturnsToScale.crs)


@dataclass(frozen=True, eq=False)
class ModelInstance:
    """Data of one evaluation: matrices are indicator-by-DMU (n columns)."""

    dmu: str
    index: int
    dmu_names: tuple[str, ...]
    input_names: tuple[str, ...]
    good_names: tuple[str, ...]
    bad_names: tuple[str, ...]
    X: np.ndarray
    Yg: np.ndarray
    Yb: np.ndarray
    L: float
    U: float

    def __post_init__(self):
        for name in ("X", "Yg", "Yb"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (0 <= self.index < len(self.dmu_names)):
            raise ModelError(f"DMU index {self.index} out of range")
        if not (0.0 <= self.L <= self.U):
            raise ModelError(f"invalid bounds L={self.L}, U={self.U}")

    @property
    def n(self) -> int:
        return len(self.dmu_names)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def s1(self) -> int:
        return self.Yg.shape[0]

    @property
    def s2(self) -> int:
        return self.Yb.shape[0] if self.Yb.size else 0

    @property
    def s(self) -> int:
        return self.s1 + self.s2

    @property
    def x0(self) -> np.ndarray:
        return self.X[:, self.index]

    @property
    def y0g(self) -> np.ndarray:
        return self.Yg[:, self.index]

    @property
    def y0b(self) -> np.ndarray:
        return (self.Yb[:, self.index] if self.s2
                else np.empty(0))


@dataclass(frozen=True, eq=False)
class Projection:
    """Frontier target: reduced inputs, expanded goods, reduced bads."""

    inputs: np.ndarray
    goods: np.ndarray
    bads: np.ndarray


@dataclass(frozen=True, eq=False)
class EfficiencyResult:
    dmu: str
    kind: ModelKind
    score: float
    phi: float
    lam: np.ndarray
    slack_in: np.ndarray
    slack_good: np.ndarray
    slack_bad: np.ndarray
    projection: Projection


@dataclass(frozen=True)
class RateReport:
    """Improvement rates in percent, keyed by indicator name."""

    dmu: str
    input_reduction_pct: dict[str, float]
    bad_reduction_pct: dict[str, float]
    good_increase_pct: dict[str, float]


def build_instance(d: Dataset, dmu: str, spec: ModelSpec, *,
                   allow_plain_sbm: bool = False) -> ModelInstance:
    """Slice the dataset into the matrices of one DMU's evaluation.

    Meta columns are dropped.  SbmUndesirable normally requires at least
    one undesirable column; `allow_plain_sbm` waives that (plain SBM).
    """
    idx = d.dmu_index(dmu)
    in_cols = d.role_columns(Role.INPUT)
    good_cols = d.role_columns(Role.DESIRABLE)
    bad_cols = d.role_columns(Role.UNDESIRABLE)
    if not in_cols:
        raise ModelError("no input columns in dataset")
    if not good_cols:
        raise ModelError("no desirable-output columns in dataset")
    if (spec.kind is ModelKind.SBM_UNDESIRABLE and not bad_cols
            and not allow_plain_sbm):
        raise ModelError("no undesirable-output columns; pass "
                         "allow_plain_sbm=True to run plain SBM")
    rts = spec.returns_to_scale
    return ModelInstance(
        dmu=dmu,
        index=idx,
        dmu_names=d.dmu_names,
        input_names=tuple(d.indicators[j].name for j in in_cols),
        good_names=tuple(d.indicators[j].name for j in good_cols),
        bad_names=tuple(d.indicators[j].name for j in bad_cols),
        X=d.values[:, in_cols].T,
        Yg=d.values[:, good_cols].T,
        Yb=(d.values[:, bad_cols].T if bad_cols
            else np.empty((0, d.n_dmus))),
        L=rts.lower,
        U=rts.upper,
    )


def _intensity_rows(inst: ModelInstance, n_vars: int, lam_off: int,
                    t_col: Optional[int] = None):
    """Equality rows for L <= e lambda <= U with surplus/slack columns.

    Returns (rows, rhs, extra_cols) where the extra surplus/slack columns
    are assumed to sit at the end of the variable vector.  With a scale
    column `t_col` the bounds read L*t <= e Lambda <= U*t.
    """
    rows = []
    rhs = []
    extra = 0
    if inst.L > 0.0:
        extra += 1
    if math.isfinite(inst.U):
        extra += 1
    width = n_vars + extra
    slot = n_vars
    if inst.L > 0.0:
        row = np.zeros(width)
        row[lam_off:lam_off + inst.n] = 1.0
        row[slot] = -1.0
        if t_col is None:
            rhs.append(inst.L)
        else:
            row[t_col] = -inst.L
            rhs.append(0.0)
        rows.append(row)
        slot += 1
    if math.isfinite(inst.U):
        row = np.zeros(width)
        row[lam_off:lam_off + inst.n] = 1.0
        row[slot] = 1.0
        if t_col is None:
            rhs.append(inst.U)
        else:
            row[t_col] = -inst.U
            rhs.append(0.0)
        rows.append(row)
    return rows, rhs, extra


def _clip_tiny(v: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    out = np.array(v, dtype=float)
    out[(out < 0.0) & (out > -tol)] = 0.0
    return out + 0.0  # normalizes -0.0 to +0.0


def _solve(lp: StandardFormLP, context: str) -> linprog.LPSolution:
    sol = linprog.solve(lp)
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"{context}: LP ended {sol.status.name}")
    return sol


def evaluate_ccr_output(d: Dataset, dmu: str, spec: ModelSpec) -> EfficiencyResult:
    """Two-stage output-oriented CCR; score = 1/phi*.

    Stage 1 maximizes the radial output expansion phi; stage 2 fixes phi*
    and maximizes total slack so reported slacks are frontier projections,
    not arbitrary alternate optima.  Undesirable columns are ignored.
    Assumes a valid dataset (see `dataset.validate`).
    """
    if spec.kind is not ModelKind.CCR_OUTPUT:
        raise ModelError(f"evaluate_ccr_output got spec kind {spec.kind}")
    inst = build_instance(d, dmu, spec)
    n, m, s1 = inst.n, inst.m, inst.s1
    x0, y0g = inst.x0, inst.y0g

    # stage 1 variables: [phi, lambda, s_in, s_good] (+ bound columns)
    base = 1 + n + m + s1
    lam_off = 1
    rows = []
    rhs = []
    for i in range(m):
        row = np.zeros(base)
        row[lam_off:lam_off + n] = inst.X[i]
        row[lam_off + n + i] = 1.0
        rows.append(row)
        rhs.append(x0[i])
    for r in range(s1):
        row = np.zeros(base)
        row[0] = -y0g[r]
        row[lam_off:lam_off + n] = inst.Yg[r]
        row[lam_off + n + m + r] = -1.0
        rows.append(row)
        rhs.append(0.0)
    brows, brhs, extra = _intensity_rows(inst, base, lam_off)
    A = np.zeros((len(rows) + len(brows), base + extra))
    for i, row in enumerate(rows):
        A[i, :base] = row
    for i, row in enumerate(brows):
        A[len(rows) + i] = row
    b = np.array(rhs + brhs)
    c = np.zeros(base + extra)
    c[0] = -1.0
    sol1 = _solve(StandardFormLP(c, A, b), f"CCR stage 1 for DMU {dmu!r}")
    phi = -sol1.objective
    if abs(phi - 1.0) <= 1e-9:
        phi = 1.0

    # stage 2: phi fixed, maximize total slack
    A2 = A[:, 1:].copy()
    b2 = b.copy()
    b2[m:m + s1] = phi * y0g
    c2 = np.zeros(A2.shape[1])
    c2[n:n + m + s1] = -1.0
    sol2 = _solve(StandardFormLP(c2, A2, b2), f"CCR stage 2 for DMU {dmu!r}")

    lam = _clip_tiny(sol2.primal[:n])
    s_in = _clip_tiny(sol2.primal[n:n + m])
    s_good = _clip_tiny(sol2.primal[n + m:n + m + s1])
    score = 1.0 / phi
    if abs(score - 1.0) <= 1e-9:
        score = 1.0
    return EfficiencyResult(
        dmu=dmu, kind=ModelKind.CCR_OUTPUT, score=score, phi=phi,
        lam=lam, slack_in=s_in, slack_good=s_good, slack_bad=np.empty(0),
        projection=Projection(inputs=x0 - s_in, goods=phi * y0g + s_good,
                              bads=np.empty(0)),
    )


@dataclass(frozen=True)
class SbmRecovery:
    """Maps Charnes-Cooper variables (t, Lambda, S) back to (lambda, s)."""

    n: int
    m: int
    s1: int
    s2: int

    def recover(self, primal: np.ndarray):
        t = float(primal[0])
        if t <= 1e-7:
            raise ModelError("degenerate Charnes-Cooper scale "
                             f"(t = {t:.3e})")
        off = 1
        lam = primal[off:off + self.n] / t
        off += self.n
        s_in = primal[off:off + self.m] / t
        off += self.m
        s_good = primal[off:off + self.s1] / t
        off += self.s1
        s_bad = primal[off:off + self.s2] / t
        return t, _clip_tiny(lam), _clip_tiny(s_in), _clip_tiny(s_good), \
            _clip_tiny(s_bad)


def linearize_sbm(inst: ModelInstance) -> tuple[StandardFormLP, SbmRecovery]:
    """Charnes-Cooper linearization of the SBM ratio.

    Variables are (t, Lambda, S_in, S_good, S_bad) with Lambda = t*lambda
    and S = t*s.  The normalization row pins the denominator to 1; the
    objective then equals the original ratio.
    """
    n, m, s1, s2 = inst.n, inst.m, inst.s1, inst.s2
    s = s1 + s2
    x0, y0g, y0b = inst.x0, inst.y0g, inst.y0b
    base = 1 + n + m + s1 + s2
    lam_off = 1
    in_off = lam_off + n
    g_off = in_off + m
    b_off = g_off + s1

    rows = []
    rhs = []
    norm = np.zeros(base)
    norm[0] = 1.0
    for r in range(s1):
        norm[g_off + r] = 1.0 / (s * y0g[r])
    for r in range(s2):
        norm[b_off + r] = 1.0 / (s * y0b[r])
    rows.append(norm)
    rhs.append(1.0)
    for i in range(m):
        row = np.zeros(base)
        row[0] = x0[i]
        row[lam_off:lam_off + n] = -inst.X[i]
        row[in_off + i] = -1.0
        rows.append(row)
        rhs.append(0.0)
    for r in range(s1):
        row = np.zeros(base)
        row[0] = y0g[r]
        row[lam_off:lam_off + n] = -inst.Yg[r]
        row[g_off + r] = 1.0
        rows.append(row)
        rhs.append(0.0)
    for r in range(s2):
        row = np.zeros(base)
        row[0] = y0b[r]
        row[lam_off:lam_off + n] = -inst.Yb[r]
        row[b_off + r] = -1.0
        rows.append(row)
        rhs.append(0.0)
    brows, brhs, extra = _intensity_rows(inst, base, lam_off, t_col=0)
    A = np.zeros((len(rows) + len(brows), base + extra))
    for i, row in enumerate(rows):
        A[i, :base] = row
    for i, row in enumerate(brows):
        A[len(rows) + i] = row
    b = np.array(rhs + brhs)
    c = np.zeros(base + extra)
    c[0] = 1.0
    for i in range(m):
        c[in_off + i] = -1.0 / (m * x0[i])
    return StandardFormLP(c, A, b), SbmRecovery(n=n, m=m, s1=s1, s2=s2)


def evaluate_sbm_undesirable(d: Dataset, dmu: str, spec: ModelSpec, *,
                             allow_plain_sbm: bool = False) -> EfficiencyResult:
    """SBM with undesirable outputs; score = rho* in (0, 1].

    Assumes a valid dataset (see `dataset.validate`).
    """
    if spec.kind is not ModelKind.SBM_UNDESIRABLE:
        raise ModelError(f"evaluate_sbm_undesirable got spec kind {spec.kind}")
    inst = build_instance(d, dmu, spec, allow_plain_sbm=allow_plain_sbm)
    lp, recovery = linearize_sbm(inst)
    sol = _solve(lp, f"SBM solve for DMU {dmu!r}")
    t, lam, s_in, s_good, s_bad = recovery.recover(sol.primal)
    score = sol.objective
    if abs(score - 1.0) <= 1e-9:
        score = 1.0
    return EfficiencyResult(
        dmu=dmu, kind=ModelKind.SBM_UNDESIRABLE, score=score, phi=1.0,
        lam=lam, slack_in=s_in, slack_good=s_good, slack_bad=s_bad,
        projection=Projection(inputs=inst.x0 - s_in,
                              goods=inst.y0g + s_good,
                              bads=inst.y0b - s_bad),
    )


def improvement_targets(r: EfficiencyResult, inst: ModelInstance) -> RateReport:
    """Percent improvement rates implied by a result's slacks.

    Inputs and undesirable outputs report reduction rates 100*s/value; the
    desirable outputs report 100*((phi-1) + s/value), folding the radial
    expansion in.  Rates below 1e-7 snap to exactly 0.
    """

    def pct(vals: dict[str, float]) -> dict[str, float]:
        out = {}
        for name, v in vals.items():
            v = max(v, 0.0)
            out[name] = 0.0 if v < 1e-7 else v
        return out

    radial = (r.phi - 1.0) * 100.0
    return RateReport(
        dmu=r.dmu,
        input_reduction_pct=pct({
            name: 100.0 * s / x for name, s, x
            in zip(inst.input_names, r.slack_in, inst.x0)}),
        bad_reduction_pct=pct({
            name: 100.0 * s / y for name, s, y
            in zip(inst.bad_names, r.slack_bad, inst.y0b)}),
        good_increase_pct=pct({
            name: radial + 100.0 * s / y for name, s, y
            in zip(inst.good_names, r.slack_good, inst.y0g)}),
    )


def evaluate_all(d: Dataset, spec: ModelSpec, *,
                 allow_plain_sbm: bool = False) -> list[EfficiencyResult]:
    """Evaluate every DMU, validating the dataset once; dataset order."""
    problems = validate(d)
    if problems:
        detail = "; ".join(str(p) for p in problems)
        raise DataError(f"invalid dataset: {detail}")
    out = []
    for dmu in d.dmu_names:
        if spec.kind is ModelKind.CCR_OUTPUT:
            out.append(evaluate_ccr_output(d, dmu, spec))
        else:
            out.append(evaluate_sbm_undesirable(
                d, dmu, spec, allow_plain_sbm=allow_plain_sbm))
    return out
