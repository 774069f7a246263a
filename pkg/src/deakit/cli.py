"""Command-line frontend.

Commands: stats, corr, rank, evaluate, synth, report.  Results go to
stdout; diagnostics to stderr.  Exit codes: 0 success, 1 data/model
errors, 2 usage errors.  The environment variables DEA_ITER_CAP (simplex
iteration cap) and DEA_BACKEND (python|cython|auto) tune the solver.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .analysis import compare_models, correlation_matrix, efficiency_bands, \
    rank_scores
from .dataset import CsvSchema, Dataset, Role, descriptive_stats, load_csv, \
    load_stats_spec, render_csv, synthesize_matching
from .errors import DeaError
from .models import (ModelKind, ModelSpec, ReturnsToScale, build_instance,
                     evaluate_all, improvement_targets)
from .render import Column, Table, render_table

_MODEL_TOKENS = {k.value: k for k in ModelKind}
_RTS_TOKENS = {"crs": ReturnsToScale.crs, "vrs": ReturnsToScale.vrs}


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    model: Optional[str] = None
    rts: str = "crs"
    fmt: str = "md"
    method: str = "pearson"
    spec: Optional[str] = None
    n: Optional[int] = None
    seed: int = 0
    t1: float = 0.999
    t2: float = 0.20
    epsilon_shift: bool = False
    verbose: bool = False


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deakit",
        description="DEA efficiency toolkit: CCR and SBM with undesirable "
                    "outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt_p = argparse.ArgumentParser(add_help=False)
    fmt_p.add_argument("--format", choices=("csv", "json", "md"),
                       default="md", dest="fmt")
    fmt_p.add_argument("--verbose", action="store_true")

    in_p = argparse.ArgumentParser(add_help=False)
    in_p.add_argument("--input", required=True, help="dataset CSV path")
    in_p.add_argument("--epsilon-shift", action="store_true",
                      help="replace zeros in non-meta columns by "
                           "1e-6 x column max")

    model_p = argparse.ArgumentParser(add_help=False)
    model_p.add_argument("--model", choices=sorted(_MODEL_TOKENS),
                         required=True)
    model_p.add_argument("--rts", choices=("crs", "vrs"), default="crs")

    sub.add_parser("stats", parents=[in_p, fmt_p],
                   help="per-indicator max/min/mean/sd")
    corr = sub.add_parser("corr", parents=[in_p, fmt_p],
                          help="indicator correlation matrix")
    corr.add_argument("--method", choices=("pearson", "spearman"),
                      default="pearson")
    sub.add_parser("rank", parents=[in_p, model_p, fmt_p],
                   help="scores with competition ranks")
    sub.add_parser("evaluate", parents=[in_p, model_p, fmt_p],
                   help="scores and improvement rates for one model")
    synth = sub.add_parser("synth", parents=[fmt_p],
                           help="synthesize a dataset matching a stats spec")
    synth.add_argument("--spec", required=True,
                       help="stats spec CSV (name,role,min,max,mean,sd)")
    synth.add_argument("--n", required=True, type=int,
                       help="number of DMUs")
    synth.add_argument("--seed", type=int, default=0)
    report = sub.add_parser("report", parents=[in_p, fmt_p],
                            help="joint CCR and SBM report with mean row")
    report.add_argument("--rts", choices=("crs", "vrs"), default="crs")
    report.add_argument("--t1", type=float, default=0.999,
                        help="level-1 score threshold")
    report.add_argument("--t2", type=float, default=0.20,
                        help="level-2 score threshold")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    fields = {f: getattr(args, f) for f in RunConfig.__dataclass_fields__
              if hasattr(args, f)}
    return RunConfig(**fields)


def _load(cfg: RunConfig) -> Dataset:
    return load_csv(cfg.input, CsvSchema(epsilon_shift=cfg.epsilon_shift))


def _model_spec(cfg: RunConfig) -> ModelSpec:
    return ModelSpec(_MODEL_TOKENS[cfg.model], _RTS_TOKENS[cfg.rts]())


def _note(cfg: RunConfig, msg: str) -> None:
    if cfg.verbose:
        print(msg, file=sys.stderr)


def _rate_columns(d: Dataset, prefix: str = "",
                  include_bads: bool = True) -> list[Column]:
    cols = []
    for j in d.role_columns(Role.INPUT):
        cols.append(Column(f"{prefix}reduce {d.indicators[j].name} (%)",
                           "rate"))
    if include_bads:
        for j in d.role_columns(Role.UNDESIRABLE):
            cols.append(Column(f"{prefix}reduce {d.indicators[j].name} (%)",
                               "rate"))
    for j in d.role_columns(Role.DESIRABLE):
        cols.append(Column(f"{prefix}increase {d.indicators[j].name} (%)",
                           "rate"))
    return cols


def _rate_cells(d: Dataset, rates, include_bads: bool = True) -> list[float]:
    cells = []
    for j in d.role_columns(Role.INPUT):
        cells.append(rates.input_reduction_pct.get(d.indicators[j].name, 0.0))
    if include_bads:
        for j in d.role_columns(Role.UNDESIRABLE):
            cells.append(rates.bad_reduction_pct.get(d.indicators[j].name,
                                                     0.0))
    for j in d.role_columns(Role.DESIRABLE):
        cells.append(rates.good_increase_pct.get(d.indicators[j].name, 0.0))
    return cells


def _cmd_stats(cfg: RunConfig) -> str:
    d = _load(cfg)
    rows = descriptive_stats(d)
    table = Table(
        columns=(Column("indicator", "text"), Column("role", "text"),
                 Column("max"), Column("min"), Column("mean"),
                 Column("sd")),
        rows=tuple((r.indicator, r.role.value, r.max, r.min, r.mean, r.sd)
                   for r in rows))
    return render_table(table, cfg.fmt)


def _cmd_corr(cfg: RunConfig) -> str:
    d = _load(cfg)
    cm = correlation_matrix(d, cfg.method)
    columns = [Column("indicator", "text")]
    columns += [Column(lbl, "score") for lbl in cm.labels]
    rows = tuple((lbl, *cm.values[i]) for i, lbl in enumerate(cm.labels))
    return render_table(Table(tuple(columns), rows), cfg.fmt)


def _cmd_rank(cfg: RunConfig) -> str:
    d = _load(cfg)
    results = evaluate_all(d, _model_spec(cfg))
    ranks = rank_scores([r.score for r in results])
    table = Table(
        columns=(Column("dmu", "text"), Column("score", "score"),
                 Column("rank", "int")),
        rows=tuple((r.dmu, r.score, k) for r, k in zip(results, ranks)))
    return render_table(table, cfg.fmt)


def _cmd_evaluate(cfg: RunConfig) -> str:
    d = _load(cfg)
    spec = _model_spec(cfg)
    results = evaluate_all(d, spec)
    rate_spec = ModelSpec(ModelKind.CCR_OUTPUT, spec.returns_to_scale)
    with_bads = spec.kind is ModelKind.SBM_UNDESIRABLE
    rows = []
    for r in results:
        _note(cfg, f"evaluated {r.dmu}: score {r.score:.6f}")
        rates = improvement_targets(r, build_instance(d, r.dmu, rate_spec))
        rows.append((r.dmu, r.score, *_rate_cells(d, rates, with_bads)))
    table = Table(
        columns=(Column("dmu", "text"), Column("score", "score"),
                 *_rate_columns(d, include_bads=with_bads)),
        rows=tuple(rows))
    return render_table(table, cfg.fmt)


def _cmd_synth(cfg: RunConfig) -> str:
    spec_rows = load_stats_spec(cfg.spec)
    d = synthesize_matching(spec_rows, cfg.n, cfg.seed)
    return render_csv(d)


def _cmd_report(cfg: RunConfig) -> str:
    d = _load(cfg)
    rts = _RTS_TOKENS[cfg.rts]()
    _note(cfg, "running CCR (EE)")
    ee = evaluate_all(d, ModelSpec(ModelKind.CCR_OUTPUT, rts))
    _note(cfg, "running SBM with undesirable outputs (EPI)")
    epi = evaluate_all(d, ModelSpec(ModelKind.SBM_UNDESIRABLE, rts))
    records = compare_models(ee, epi, d)

    meta_names = sorted(records[0].meta)
    columns = [Column("dmu", "text"), Column("EE", "scorerank"),
               Column("EPI", "scorerank")]
    columns += _rate_columns(d, prefix="CCR ", include_bads=False)
    columns += _rate_columns(d, prefix="SBM ")
    columns += [Column(name) for name in meta_names]
    rows = []
    for rec in records:
        rows.append((rec.dmu, (rec.ee, rec.ee_rank), (rec.epi, rec.epi_rank),
                     *_rate_cells(d, rec.ccr_rates, include_bads=False),
                     *_rate_cells(d, rec.sbm_rates),
                     *(rec.meta[name] for name in meta_names)))
    out = render_table(Table(tuple(columns), tuple(rows)), cfg.fmt)
    if cfg.fmt == "md":
        bands = efficiency_bands(records, (cfg.t1, cfg.t2))
        lines = ["", f"Levels by EPI (t1={cfg.t1:g}, t2={cfg.t2:g}):"]
        for level in (1, 2, 3):
            members = ", ".join(bands[level]) if bands[level] else "-"
            lines.append(f"- level {level}: {members}")
        out += "\n".join(lines) + "\n"
    return out


_COMMANDS = {
    "stats": _cmd_stats,
    "corr": _cmd_corr,
    "rank": _cmd_rank,
    "evaluate": _cmd_evaluate,
    "synth": _cmd_synth,
    "report": _cmd_report,
}


def dispatch(cfg: RunConfig) -> int:
    """Run one command; print its table to stdout and return the exit code."""
    try:
        out = _COMMANDS[cfg.command](cfg)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except DeaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


def console_main(argv: Optional[Sequence[str]] = None) -> int:
    return dispatch(parse_args(argv))
