"""Statistics over model results: correlations, ranking, bands, comparison."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, Role
from .errors import DataError
from .models import (EfficiencyResult, ModelKind, ModelSpec, RateReport,
                     build_instance, improvement_targets)

RANK_TOL = 5e-3


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    method: str

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", tuple(self.labels))


def _average_ranks(v: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the average of their positions."""
    order = np.argsort(v, kind="stable")
    sorted_v = v[order]
    ranks = np.empty(v.size)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def correlation_matrix(d: Dataset, method: str = "pearson") -> CorrelationMatrix:
    """Pairwise correlations of the non-meta columns.

    Pearson is the centered cosine; Spearman applies Pearson to
    average-tied ranks.  Needs at least 3 DMUs and no constant column.
    """
    if method not in ("pearson", "spearman"):
        raise DataError(f"unknown correlation method {method!r}")
    if d.n_dmus < 3:
        raise DataError("correlation needs at least 3 DMUs")
    cols = d.model_columns()
    labels = tuple(d.indicators[j].name for j in cols)
    data = d.values[:, cols].astype(float)
    for k, j in enumerate(cols):
        if np.ptp(data[:, k]) == 0.0:
            raise DataError(f"constant column {d.indicators[j].name!r}: "
                            "correlation undefined")
    if method == "spearman":
        data = np.column_stack([_average_ranks(data[:, k])
                                for k in range(data.shape[1])])
    corr = np.corrcoef(data, rowvar=False)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    np.clip(corr, -1.0, 1.0, out=corr)
    return CorrelationMatrix(labels=labels, values=corr, method=method)


def rank_scores(scores: Sequence[float], tol: float = RANK_TOL) -> list[int]:
    """Competition ranks, descending, with near-ties sharing a rank.

    Scores within `tol` of a tie group's best score join that group; every
    member gets rank = 1 + number of DMUs in strictly better groups.
    """
    arr = np.asarray(list(scores), dtype=float)
    if arr.size == 0:
        raise DataError("rank_scores needs at least one score")
    if not np.isfinite(arr).all():
        raise DataError("rank_scores requires finite scores")
    order = np.argsort(-arr, kind="stable")
    ranks = [0] * arr.size
    group_rank = 1
    leader = arr[order[0]]
    for pos, idx in enumerate(order):
        if leader - arr[idx] > tol:
            group_rank = pos + 1
            leader = arr[idx]
        ranks[idx] = group_rank
    return ranks


@dataclass(frozen=True)
class ComparisonRecord:
    """One joined row of the CCR-vs-SBM report (EE and EPI side by side)."""

    dmu: str
    ee: float
    epi: float
    ee_rank: Optional[int]
    epi_rank: Optional[int]
    ccr_rates: RateReport
    sbm_rates: RateReport
    meta: dict[str, float] = field(default_factory=dict)
    is_mean: bool = False


def efficiency_bands(records: Sequence[ComparisonRecord],
                     thresholds: tuple[float, float] = (0.999, 0.20),
                     key: str = "epi") -> dict[int, list[str]]:
    """Partition DMUs into three levels by score (mean rows are skipped).

    Level 1: score >= t1; level 2: t2 <= score < t1; level 3: score < t2.
    """
    t1, t2 = thresholds
    if not (0.0 < t2 < t1 < 1.0):
        raise DataError(f"thresholds must satisfy 0 < t2 < t1 < 1, "
                        f"got ({t1}, {t2})")
    if key not in ("epi", "ee"):
        raise DataError(f"unknown band key {key!r}")
    levels: dict[int, list[str]] = {1: [], 2: [], 3: []}
    for rec in records:
        if rec.is_mean:
            continue
        score = rec.epi if key == "epi" else rec.ee
        if score >= t1:
            levels[1].append(rec.dmu)
        elif score >= t2:
            levels[2].append(rec.dmu)
        else:
            levels[3].append(rec.dmu)
    return levels


def _mean_rates(reports: Sequence[RateReport]) -> RateReport:
    def avg(key: str) -> dict[str, float]:
        dicts = [getattr(r, key) for r in reports]
        names = list(dicts[0].keys()) if dicts else []
        return {name: float(np.mean([dd[name] for dd in dicts]))
                for name in names}

    return RateReport(dmu="Mean",
                      input_reduction_pct=avg("input_reduction_pct"),
                      bad_reduction_pct=avg("bad_reduction_pct"),
                      good_increase_pct=avg("good_increase_pct"))


def compare_models(ee: Sequence[EfficiencyResult],
                   epi: Sequence[EfficiencyResult],
                   d: Dataset) -> list[ComparisonRecord]:
    """Join CCR and SBM results per DMU and append a mean record.

    Both result lists must cover the dataset's DMUs in dataset order.
    The mean record averages every numeric column; its ranks are None.
    """
    names = [r.dmu for r in ee]
    if names != [r.dmu for r in epi] or names != list(d.dmu_names):
        raise DataError("compare_models: DMU sets/order differ between "
                        "result lists and dataset")
    ee_ranks = rank_scores([r.score for r in ee])
    epi_ranks = rank_scores([r.score for r in epi])
    meta_cols = d.role_columns(Role.META)
    spec = ModelSpec(ModelKind.CCR_OUTPUT)

    records = []
    for i, dmu in enumerate(names):
        inst = build_instance(d, dmu, spec)
        records.append(ComparisonRecord(
            dmu=dmu,
            ee=ee[i].score,
            epi=epi[i].score,
            ee_rank=ee_ranks[i],
            epi_rank=epi_ranks[i],
            ccr_rates=improvement_targets(ee[i], inst),
            sbm_rates=improvement_targets(epi[i], inst),
            meta={d.indicators[j].name: float(d.values[i, j])
                  for j in meta_cols},
        ))

    mean_meta = {d.indicators[j].name: float(d.values[:, j].mean())
                 for j in meta_cols}
    records.append(ComparisonRecord(
        dmu="Mean",
        ee=float(np.mean([r.ee for r in records])),
        epi=float(np.mean([r.epi for r in records])),
        ee_rank=None,
        epi_rank=None,
        ccr_rates=_mean_rates([r.ccr_rates for r in records]),
        sbm_rates=_mean_rates([r.sbm_rates for r in records]),
        meta=mean_meta,
        is_mean=True,
    ))
    return records
