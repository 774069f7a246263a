"""Acceptance gate: one test per criterion, in reference_2011 terms.

Criteria 1-3 and 8 check internal consistency of the published 2011
figures (scores, mean row, levels); 4-6 check the solvers against
analytic values, independent oracles and invariants; 7 round-trips the
published descriptive statistics through synthesis and a full report.
"""

import contextlib
import io
import json
import time

import numpy as np
import pytest

import reference_2011 as ref
from deakit import (Dataset, EfficiencyResult, ModelKind, ModelSpec,
                    Projection, Role, StatsRow, build_instance,
                    compare_models, descriptive_stats, efficiency_bands,
                    evaluate_all, evaluate_ccr_output,
                    evaluate_sbm_undesirable, improvement_targets, load_csv,
                    rank_scores, render_csv, synthesize_matching)
from deakit import linprog
from deakit.analysis import ComparisonRecord
from deakit.cli import console_main
from deakit.linprog import Status, verify_optimality
from deakit.models import RateReport
from oracles import ccr_phi_enum, random_dataset, sbm_grid_oracle

CCR = ModelSpec(ModelKind.CCR_OUTPUT)
SBM = ModelSpec(ModelKind.SBM_UNDESIRABLE)

CANONICAL = b"dmu,in:x,out+:yg,out-:yb\nA,1,2,1\nB,1,1,2\n"


def best_of(fn, repeats=5):
    """Smallest wall time over `repeats` calls (first call warms caches)."""
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def published_dataset() -> Dataset:
    """11 provinces with every model value pinned at 100.

    With x0 = y0 = 100 a slack of s maps to a rate of exactly s percent,
    so published rate columns can be re-expressed as synthetic results.
    """
    header = ("dmu,in:fishing_vessels,in:berths,in:hotel_rooms,"
              "in:personnel,out-:waste_water,out+:gross_ocean_product,"
              "meta:pcgdp")
    lines = [header]
    for i, dmu in enumerate(ref.DMUS):
        lines.append(f"{dmu},100,100,100,100,100,100,{ref.PCGDP[i]}")
    return load_csv("\n".join(lines).encode() + b"\n")


def published_results():
    """Synthetic EfficiencyResults encoding the published 2011 columns."""
    proj = Projection(np.full(4, 100.0), np.full(1, 100.0),
                      np.full(1, 100.0))
    ee, epi = [], []
    for i, dmu in enumerate(ref.DMUS):
        ee.append(EfficiencyResult(
            dmu=dmu, kind=ModelKind.CCR_OUTPUT, score=ref.EE[i],
            phi=1.0 + ref.CCR_OUTPUT_INC[i] / 100.0, lam=np.zeros(11),
            slack_in=np.array([ref.CCR_FISHING[i], ref.CCR_BERTHS[i],
                               ref.CCR_HOTEL[i], 0.0]),
            slack_good=np.zeros(1), slack_bad=np.zeros(1),
            projection=proj))
        epi.append(EfficiencyResult(
            dmu=dmu, kind=ModelKind.SBM_UNDESIRABLE, score=ref.EPI[i],
            phi=1.0, lam=np.zeros(11),
            slack_in=np.array([ref.UOM_FISHING[i], ref.UOM_BERTHS[i],
                               ref.UOM_HOTEL[i], ref.UOM_PERSONNEL[i]]),
            slack_good=np.zeros(1),
            slack_bad=np.array([ref.UOM_WASTE[i]]),
            projection=proj))
    return ee, epi


def test_c1_ranking_reproduction():
    """Competition ranks of the published score columns, in < 1 ms."""
    assert tuple(rank_scores(ref.EE)) == ref.EE_RANKS
    assert tuple(rank_scores(ref.EPI)) == ref.EPI_RANKS

    def both():
        rank_scores(ref.EE)
        rank_scores(ref.EPI)

    assert best_of(both) < 1e-3


def test_c2_mean_row_reproduction():
    """compare_models mean row matches the printed one within +/-0.05."""
    d = published_dataset()
    ee, epi = published_results()
    records = compare_models(ee, epi, d)
    assert best_of(lambda: compare_models(ee, epi, d)) < 1e-3

    mean = records[-1]
    assert mean.is_mean and mean.dmu == "Mean"
    got = {
        "ee": mean.ee,
        "epi": mean.epi,
        "ccr_fishing": mean.ccr_rates.input_reduction_pct["fishing_vessels"],
        "uom_fishing": mean.sbm_rates.input_reduction_pct["fishing_vessels"],
        "uom_berths": mean.sbm_rates.input_reduction_pct["berths"],
        "uom_hotel": mean.sbm_rates.input_reduction_pct["hotel_rooms"],
        "uom_waste": mean.sbm_rates.bad_reduction_pct["waste_water"],
        "uom_personnel": mean.sbm_rates.input_reduction_pct["personnel"],
        "ccr_output_inc":
            mean.ccr_rates.good_increase_pct["gross_ocean_product"],
    }
    off = {k: f"got {got[k]:.4f}, printed {want}, diff {abs(got[k] - want):.4f}"
           for k, want in ref.MEAN_ROW.items() if abs(got[k] - want) > 0.05}
    assert not off, f"mean-row columns outside +/-0.05: {off}"


def test_c3_ccr_radial_identity():
    """Published output-increase rates sit in the 1/EE - 1 interval.

    EE is printed at 2 decimals, so the identity rate = 1/EE - 1 is only
    pinned down to the interval implied by EE +/- 0.005.
    """
    checked = 0
    for i, dmu in enumerate(ref.DMUS):
        if ref.EE[i] >= 1.0:
            continue
        lo = 1.0 / (ref.EE[i] + 0.005) - 1.0
        hi = 1.0 / (ref.EE[i] - 0.005) - 1.0
        rate = ref.CCR_OUTPUT_INC[i] / 100.0
        assert lo <= rate <= hi, (
            f"{dmu}: rate {rate:.4f} outside [{lo:.4f}, {hi:.4f}]")
        checked += 1
    assert checked == 7


def test_c4_analytic_micro_instances():
    """Canonical 2-DMU pair: EE = (1, 1/2), rho* = (1, 4/11)."""
    d = load_csv(CANONICAL)

    ra = evaluate_ccr_output(d, "A", CCR)
    rb = evaluate_ccr_output(d, "B", CCR)
    assert ra.score == pytest.approx(1.0, abs=1e-6)
    assert rb.score == pytest.approx(0.5, abs=1e-6)

    sa = evaluate_sbm_undesirable(d, "A", SBM)
    sb = evaluate_sbm_undesirable(d, "B", SBM)
    assert sa.score == pytest.approx(1.0, abs=1e-6)
    assert sb.score == pytest.approx(4.0 / 11.0, abs=1e-6)
    np.testing.assert_allclose(sb.slack_in, [0.5], atol=1e-6)
    np.testing.assert_allclose(sb.slack_good, [0.0], atol=1e-6)
    np.testing.assert_allclose(sb.slack_bad, [1.5], atol=1e-6)


def test_c5_oracle_equivalence_suite():
    """200 seeded datasets against the grid and enumeration oracles."""
    t0 = time.perf_counter()
    worst_sbm = worst_ccr = 0.0
    for i in range(200):
        n = 1 + (i % 3)
        m = 1 + ((i // 3) % 2)
        d = random_dataset(1000 + i, n=n, m=m)
        X = d.values[:, d.role_columns(Role.INPUT)].T
        Yg = d.values[:, d.role_columns(Role.DESIRABLE)].T
        Yb = d.values[:, d.role_columns(Role.UNDESIRABLE)].T
        for k, dmu in enumerate(d.dmu_names):
            rho, _ = sbm_grid_oracle(X, Yg, Yb, k)
            got = evaluate_sbm_undesirable(d, dmu, SBM).score
            worst_sbm = max(worst_sbm, abs(got - rho))
            phi = ccr_phi_enum(X, Yg, k)
            got = evaluate_ccr_output(d, dmu, CCR).score
            worst_ccr = max(worst_ccr, abs(got - 1.0 / phi))
    elapsed = time.perf_counter() - t0
    assert worst_sbm <= 5e-3, f"worst SBM deviation {worst_sbm:.2e}"
    assert worst_ccr <= 1e-6, f"worst CCR deviation {worst_ccr:.2e}"
    assert elapsed < 30.0, f"suite took {elapsed:.1f} s"


def test_c6_invariant_suites(monkeypatch):
    """Units invariance, efficiency characterization, peers, certificates."""
    # units invariance: scale every model column, scores must not move
    base = random_dataset(42, n=6, m=2)
    base_scores = {}
    observations = []
    for dmu in base.dmu_names:
        inst = build_instance(base, dmu, CCR)
        for tag, ev, spec in (("ccr", evaluate_ccr_output, CCR),
                              ("sbm", evaluate_sbm_undesirable, SBM)):
            r = ev(base, dmu, spec)
            base_scores[tag, dmu] = r.score
            observations.append((tag, r, inst))

    rng = np.random.default_rng(7)
    drift = 0.0
    for _ in range(100):
        f = 10.0 ** rng.uniform(-1.0, 1.0, size=len(base.indicators))
        ds = Dataset(base.dmu_names, base.indicators, base.values * f)
        for dmu in ds.dmu_names:
            inst = build_instance(ds, dmu, CCR)
            for tag, ev, spec in (("ccr", evaluate_ccr_output, CCR),
                                  ("sbm", evaluate_sbm_undesirable, SBM)):
                r = ev(ds, dmu, spec)
                drift = max(drift, abs(r.score - base_scores[tag, dmu]))
                observations.append((tag, r, inst))
    assert drift <= 1e-7, f"score drift {drift:.2e} under column scaling"

    # efficiency characterization over every instance evaluated above
    for tag, r, inst in observations:
        slack = max(float(np.max(np.abs(a), initial=0.0))
                    for a in (r.slack_in, r.slack_good, r.slack_bad))
        if tag == "sbm":
            assert (r.score >= 1.0 - 1e-9) == (slack <= 1e-7), (
                f"sbm {r.dmu}: score {r.score!r} vs max slack {slack:.2e}")
        else:
            rates = improvement_targets(r, inst)
            worst = max((v for d_ in (rates.input_reduction_pct,
                                      rates.bad_reduction_pct,
                                      rates.good_increase_pct)
                         for v in d_.values()), default=0.0)
            assert (r.score >= 1.0 - 1e-9) == (worst <= 1e-5), (
                f"ccr {r.dmu}: score {r.score!r} vs max rate {worst:.2e}")

    # reference-set efficiency under CRS: every peer scores 1
    for seed in range(300, 310):
        d = random_dataset(seed, n=5, m=2)
        for ev, spec in ((evaluate_ccr_output, CCR),
                         (evaluate_sbm_undesirable, SBM)):
            res = {dmu: ev(d, dmu, spec) for dmu in d.dmu_names}
            for r in res.values():
                for j, w in enumerate(r.lam):
                    if w > 1e-6:
                        peer = d.dmu_names[j]
                        assert res[peer].score >= 1.0 - 1e-6, (
                            f"peer {peer} of {r.dmu} scores "
                            f"{res[peer].score}")

    # feasibility/duality certificate on every Optimal solve
    real_solve = linprog.solve
    certified = {"n": 0}

    def checked(lp, **kwargs):
        sol = real_solve(lp, **kwargs)
        if sol.status is Status.OPTIMAL:
            assert verify_optimality(lp, sol)
            certified["n"] += 1
        return sol

    monkeypatch.setattr(linprog, "solve", checked)
    for seed in range(500, 508):
        d = random_dataset(seed, n=4, m=2)
        evaluate_all(d, CCR)
        evaluate_all(d, SBM)
    assert certified["n"] >= 8 * 4 * 3  # two CCR stages + one SBM per DMU


def test_c7_synthesis_round_trip(tmp_path):
    """Synthesize the published stats, then run a full report on them."""
    rows = [StatsRow(name, mx, mn, mean, sd, Role(role))
            for name, role, mx, mn, mean, sd in ref.TABLE1]
    ds = synthesize_matching(rows, n=11, seed=0)

    stats = {s.indicator: s for s in descriptive_stats(ds)}
    for name, role, mx, mn, mean, sd in ref.TABLE1:
        s = stats[name]
        for got, want in ((s.max, mx), (s.min, mn), (s.mean, mean),
                          (s.sd, sd)):
            assert got == pytest.approx(want, rel=5e-3), (
                f"{name}: {got} vs {want}")

    path = tmp_path / "synth2011.csv"
    path.write_text(render_csv(ds))
    buf = io.StringIO()
    t0 = time.perf_counter()
    with contextlib.redirect_stdout(buf):
        rc = console_main(["report", "--input", str(path),
                           "--format", "json"])
    elapsed = time.perf_counter() - t0
    assert rc == 0
    assert elapsed < 1.0, f"report took {elapsed:.2f} s"

    body = [row for row in json.loads(buf.getvalue()) if row["dmu"] != "Mean"]
    assert len(body) == 11
    for row in body:
        assert 0.0 < row["EE"] <= 1.0
        assert 0.0 < row["EPI"] <= 1.0


def test_c8_band_reproduction():
    """Default thresholds split the published EPI into the three levels."""
    empty = RateReport("", {}, {}, {})
    recs = [ComparisonRecord(dmu, ref.EE[i], ref.EPI[i], None, None,
                             empty, empty, {})
            for i, dmu in enumerate(ref.DMUS)]
    bands = efficiency_bands(recs)
    assert set(bands[1]) == ref.LEVEL1
    assert set(bands[2]) == ref.LEVEL2
    assert set(bands[3]) == ref.LEVEL3
    assert sorted(bands[1] + bands[2] + bands[3]) == sorted(ref.DMUS)
