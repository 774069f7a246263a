"""DMU datasets: definition, CSV ingestion, validation, summaries, synthesis.

The on-disk format is a plain CSV whose first header cell is the literal
``dmu``; every other header reads ``<role>:<name>`` with role one of ``in``,
``out+``, ``out-`` or ``meta``.  Values use ``.`` as the decimal separator,
no thousands separators.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DataError, SynthesisError


class Role(enum.Enum):
    INPUT = "in"
    DESIRABLE = "out+"
    UNDESIRABLE = "out-"
    META = "meta"


_ROLE_TOKENS = {r.value: r for r in Role}


@dataclass(frozen=True)
class Indicator:
    """A named column with its model role; `units` is informational only."""

    name: str
    role: Role
    units: str = ""


@dataclass(frozen=True)
class StatsRow:
    """Column summary: extremes, mean, and sample standard deviation.

    `role` is carried along so a stats spec can round-trip into
    `synthesize_matching` without a separate role list.
    """

    indicator: str
    max: float
    min: float
    mean: float
    sd: float
    role: Optional[Role] = None


@dataclass(frozen=True)
class Violation:
    invariant: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.invariant} at {self.location}: {self.message}"


@dataclass(frozen=True)
class CsvSchema:
    """Parsing options for `load_csv`.

    With `epsilon_shift`, zeros in non-meta columns are replaced by
    1e-6 x column max (and a warning is emitted) instead of being rejected.
    """

    delimiter: str = ","
    epsilon_shift: bool = False


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable DMU-by-indicator value matrix.

    Rows follow `dmu_names`, columns follow `indicators`.  Construction is
    permissive; `validate` reports invariant violations as data.
    """

    dmu_names: tuple[str, ...]
    indicators: tuple[Indicator, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dmu_names", tuple(self.dmu_names))
        object.__setattr__(self, "indicators", tuple(self.indicators))
        vals = np.array(self.values, dtype=float)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_dmus(self) -> int:
        return len(self.dmu_names)

    @property
    def n_indicators(self) -> int:
        return len(self.indicators)

    def role_columns(self, role: Role) -> list[int]:
        return [j for j, ind in enumerate(self.indicators) if ind.role is role]

    def model_columns(self) -> list[int]:
        """Columns that enter the models (everything but meta)."""
        return [j for j, ind in enumerate(self.indicators)
                if ind.role is not Role.META]

    def dmu_index(self, dmu: str) -> int:
        try:
            return self.dmu_names.index(dmu)
        except ValueError:
            raise DataError(f"unknown DMU {dmu!r}") from None

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]


def validate(d: Dataset) -> list[Violation]:
    """Check every Dataset invariant; an empty list means the data is valid."""
    out: list[Violation] = []
    rows, cols = d.values.shape if d.values.ndim == 2 else (-1, -1)
    if (rows, cols) != (len(d.dmu_names), len(d.indicators)):
        out.append(Violation(
            "dimension mismatch", "values",
            f"matrix is {d.values.shape}, expected "
            f"({len(d.dmu_names)}, {len(d.indicators)})"))
        return out

    seen: dict[str, int] = {}
    for i, name in enumerate(d.dmu_names):
        if name in seen:
            out.append(Violation("duplicate dmu", f"row {i + 1}",
                                 f"DMU name {name!r} already used"))
        seen[name] = i
    seen.clear()
    for j, ind in enumerate(d.indicators):
        if not ind.name:
            out.append(Violation("empty indicator name", f"column {j + 1}",
                                 "indicator name must be nonempty"))
        if ind.name in seen:
            out.append(Violation("duplicate indicator", f"column {j + 1}",
                                 f"indicator {ind.name!r} already used"))
        seen[ind.name] = j

    for j, ind in enumerate(d.indicators):
        if ind.role is Role.META:
            continue
        col = d.values[:, j]
        for i in range(rows):
            v = col[i]
            where = f"row {i + 1} ({d.dmu_names[i]}), column {ind.name!r}"
            if not math.isfinite(v):
                out.append(Violation("non-finite value", where, f"value {v!r}"))
            elif v <= 0.0:
                out.append(Violation("non-positive value", where,
                                     f"value {v!r} (non-meta columns must be "
                                     "strictly positive)"))

    if not d.role_columns(Role.INPUT):
        out.append(Violation("no input indicator", "header",
                             "at least one 'in' column is required"))
    if not d.role_columns(Role.DESIRABLE):
        out.append(Violation("no desirable output", "header",
                             "at least one 'out+' column is required"))
    return out


def _parse_header(cells: list[str]) -> list[Indicator]:
    if not cells or cells[0].strip() != "dmu":
        raise DataError("malformed header: first column must be 'dmu'")
    indicators = []
    for j, cell in enumerate(cells[1:], start=2):
        token, sep, name = cell.partition(":")
        token = token.strip()
        name = name.strip()
        if not sep or token not in _ROLE_TOKENS or not name:
            raise DataError(
                f"malformed header at column {j}: {cell!r} "
                "(expected '<role>:<name>' with role in in/out+/out-/meta)")
        indicators.append(Indicator(name, _ROLE_TOKENS[token]))
    if not indicators:
        raise DataError("malformed header: no indicator columns")
    return indicators


def load_csv(source: Union[str, Path, bytes, IO],
             schema: CsvSchema = CsvSchema()) -> Dataset:
    """Parse a dataset CSV and return a validated Dataset.

    Raises DataError on malformed headers, non-numeric cells, duplicate DMU
    names, or non-positive values in non-meta columns, each with row/column
    coordinates.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    text = raw.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text), delimiter=schema.delimiter)
    table = [row for row in reader if row]
    if not table:
        raise DataError("empty CSV")

    indicators = _parse_header(table[0])
    n_cols = len(indicators)
    names: list[str] = []
    rows: list[list[float]] = []
    for line_no, row in enumerate(table[1:], start=2):
        if len(row) != n_cols + 1:
            raise DataError(f"row {line_no}: expected {n_cols + 1} cells, "
                            f"got {len(row)}")
        names.append(row[0].strip())
        parsed = []
        for j, cell in enumerate(row[1:], start=2):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise DataError(f"non-numeric cell at row {line_no}, "
                                f"column {j}: {cell!r}") from None
        rows.append(parsed)
    if not rows:
        raise DataError("no data rows")

    values = np.asarray(rows, dtype=float)
    if schema.epsilon_shift:
        for j, ind in enumerate(indicators):
            if ind.role is Role.META:
                continue
            zeros = values[:, j] == 0.0
            if zeros.any():
                shift = 1e-6 * values[:, j].max()
                values[zeros, j] = shift
                warnings.warn(
                    f"epsilon-shift: replaced {int(zeros.sum())} zero(s) in "
                    f"column {ind.name!r} with {shift:g}")

    d = Dataset(tuple(names), tuple(indicators), values)
    problems = validate(d)
    if problems:
        detail = "; ".join(str(p) for p in problems)
        raise DataError(f"invalid dataset: {detail}")
    return d


def render_csv(d: Dataset) -> str:
    """Serialize a Dataset; 17 significant digits make the round trip exact."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dmu"] + [f"{ind.role.value}:{ind.name}"
                               for ind in d.indicators])
    for i, name in enumerate(d.dmu_names):
        writer.writerow([name] + [f"{v:.17g}" for v in d.values[i]])
    return buf.getvalue()


def descriptive_stats(d: Dataset) -> list[StatsRow]:
    """Per-indicator max/min/mean and sample SD (divisor n-1), meta excluded."""
    if d.n_dmus < 2:
        raise DataError("sd undefined: need at least 2 DMUs")
    out = []
    for j in d.model_columns():
        col = d.values[:, j]
        out.append(StatsRow(
            indicator=d.indicators[j].name,
            max=float(col.max()),
            min=float(col.min()),
            mean=float(col.mean()),
            sd=float(col.std(ddof=1)),
            role=d.indicators[j].role,
        ))
    return out


@dataclass(frozen=True)
class DiscriminationAdvice:
    """DMU count vs. indicator count rule-of-thumb check."""

    ratio: float
    ok: bool
    threshold: float


def check_discrimination(d: Dataset, threshold: float = 1.5) -> DiscriminationAdvice:
    """Advisory ratio of DMUs to non-meta indicators (rule of thumb: ~2x)."""
    n_ind = len(d.model_columns())
    if n_ind == 0:
        raise DataError("no model indicators")
    ratio = d.n_dmus / n_ind
    return DiscriminationAdvice(ratio=ratio, ok=ratio >= threshold,
                                threshold=threshold)


def _feasible_sd_bounds(lo: float, hi: float, mu: float, n: int) -> tuple[float, float]:
    interior_mean = (n * mu - lo - hi) / (n - 2) if n > 2 else mu
    base = (lo - mu) ** 2 + (hi - mu) ** 2
    k = n - 2
    lo_ss = base + k * (interior_mean - mu) ** 2
    hi_ss = base + k * ((hi - interior_mean) * (interior_mean - lo)
                        + (interior_mean - mu) ** 2)
    return math.sqrt(lo_ss / (n - 1)), math.sqrt(hi_ss / (n - 1))


def _synthesize_column(row: StatsRow, n: int, rng: np.random.Generator,
                       rtol: float) -> np.ndarray:
    lo, hi, mu, sd = row.min, row.max, row.mean, row.sd
    name = row.indicator
    if not (lo <= mu <= hi) or sd < 0 or lo > hi:
        raise SynthesisError(f"{name}: inconsistent stats "
                             f"(min {lo}, max {hi}, mean {mu}, sd {sd})")
    if hi == lo or sd == 0.0:
        if not (hi == lo == mu and sd == 0.0):
            raise SynthesisError(f"{name}: sd 0 requires min = max = mean")
        return np.full(n, mu)
    if n < 3:
        raise SynthesisError(f"{name}: need n >= 3 to match a non-degenerate "
                             "spec (min and max are pinned)")

    interior_sum = n * mu - lo - hi
    k = n - 2
    interior_mean = interior_sum / k
    span = hi - lo
    if not (lo - 1e-9 * span <= interior_mean <= hi + 1e-9 * span):
        raise SynthesisError(f"{name}: mean {mu} unreachable with min/max "
                             "pinned")
    sd_lo, sd_hi = _feasible_sd_bounds(lo, hi, mu, n)
    if not (sd_lo * (1 - rtol) <= sd <= sd_hi * (1 + rtol)):
        raise SynthesisError(f"{name}: sd {sd} outside achievable range "
                             f"[{sd_lo:.6g}, {sd_hi:.6g}]")

    base = rng.uniform(lo, hi, size=k)

    def column_for(alpha: float) -> np.ndarray:
        interior = np.clip(interior_mean + alpha * (base - base.mean()),
                           lo, hi)
        # restore the mean lost to clipping
        for _ in range(64):
            err = interior_sum - interior.sum()
            if abs(err) <= 1e-12 * (1.0 + abs(interior_sum)):
                break
            free = ((interior > lo) | (err > 0)) & ((interior < hi) | (err < 0))
            if not free.any():
                break
            interior[free] += err / free.sum()
            np.clip(interior, lo, hi, out=interior)
        return np.concatenate(([lo, hi], interior))

    def sd_of(alpha: float) -> float:
        return float(column_for(alpha).std(ddof=1))

    # sd grows monotonically with the spread factor: bracket then bisect
    a_lo, a_hi = 0.0, 1.0
    for _ in range(80):
        if sd_of(a_hi) >= sd:
            break
        a_hi *= 2.0
    else:
        # clipping saturated below the target; keep the best achievable
        # spread and let the closing tolerance check rule
        if sd_of(a_hi) < sd * (1 - rtol):
            raise SynthesisError(f"{name}: sd {sd} not reachable")
    for _ in range(200):
        mid = 0.5 * (a_lo + a_hi)
        if sd_of(mid) < sd:
            a_lo = mid
        else:
            a_hi = mid
        if abs(sd_of(a_hi) - sd) <= 0.1 * rtol * sd:
            break
    col = column_for(a_hi)

    got_mean, got_sd = float(col.mean()), float(col.std(ddof=1))
    if abs(got_mean - mu) > rtol * abs(mu) or abs(got_sd - sd) > rtol * sd:
        raise SynthesisError(f"{name}: could not match spec within "
                             f"{rtol:.1%} (mean {got_mean:.6g} vs {mu}, "
                             f"sd {got_sd:.6g} vs {sd})")
    perm = rng.permutation(n)
    return col[perm]


def synthesize_matching(spec: Sequence[StatsRow], n: int, seed: int,
                        rtol: float = 0.005) -> Dataset:
    """Build an n-DMU dataset whose column stats match `spec`.

    Min and max are hit exactly; mean and sd within `rtol` (default 0.5%).
    Deterministic for a fixed seed.  Each spec row must carry a role.
    """
    if not spec:
        raise SynthesisError("empty stats spec")
    rng = np.random.default_rng(seed)
    cols = []
    indicators = []
    for row in spec:
        if row.role is None:
            raise SynthesisError(f"{row.indicator}: stats row has no role")
        cols.append(_synthesize_column(row, n, rng, rtol))
        indicators.append(Indicator(row.indicator, row.role))
    names = tuple(f"dmu{i + 1:02d}" for i in range(n))
    return Dataset(names, tuple(indicators), np.column_stack(cols))


def load_stats_spec(source: Union[str, Path, bytes, IO]) -> list[StatsRow]:
    """Read a synthesis spec CSV with columns name,role,min,max,mean,sd."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    reader = csv.DictReader(io.StringIO(raw.decode("utf-8-sig")))
    required = {"name", "role", "min", "max", "mean", "sd"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise DataError("stats spec needs columns name,role,min,max,mean,sd")
    rows = []
    for rec in reader:
        token = rec["role"].strip()
        if token not in _ROLE_TOKENS:
            raise DataError(f"stats spec: unknown role {token!r} for "
                            f"{rec['name']!r}")
        try:
            rows.append(StatsRow(
                indicator=rec["name"].strip(),
                max=float(rec["max"]), min=float(rec["min"]),
                mean=float(rec["mean"]), sd=float(rec["sd"]),
                role=_ROLE_TOKENS[token]))
        except ValueError as exc:
            raise DataError(f"stats spec: non-numeric value for "
                            f"{rec['name']!r}") from exc
    if not rows:
        raise DataError("stats spec has no rows")
    return rows
