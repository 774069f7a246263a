"""DEA efficiency toolkit.

Output-oriented CCR and SBM-with-undesirable-outputs models over small
datasets of decision-making units, with dataset I/O, descriptive stats,
synthesis, correlations, rankings, and report rendering.  The simplex
solver runs on a compiled kernel when available (see `simplex_backend`).
"""

from .analysis import (ComparisonRecord, CorrelationMatrix, compare_models,
                       correlation_matrix, efficiency_bands, rank_scores)
from .dataset import (CsvSchema, Dataset, DiscriminationAdvice, Indicator,
                      Role, StatsRow, Violation, check_discrimination,
                      descriptive_stats, load_csv, load_stats_spec,
                      render_csv, synthesize_matching, validate)
from .errors import DataError, DeaError, ModelError, SolverError, \
    SynthesisError
from .linprog import (LPSolution, StandardFormLP, Status, simplex_backend,
                      solve, verify_optimality)
from .models import (EfficiencyResult, ModelInstance, ModelKind, ModelSpec,
                     Projection, RateReport, ReturnsToScale, SbmRecovery,
                     build_instance, evaluate_all, evaluate_ccr_output,
                     evaluate_sbm_undesirable, improvement_targets,
                     linearize_sbm)
from .render import Column, Table, render_table

__version__ = "0.1.0"

__all__ = [
    "ComparisonRecord", "CorrelationMatrix", "compare_models",
    "correlation_matrix", "efficiency_bands", "rank_scores",
    "CsvSchema", "Dataset", "DiscriminationAdvice", "Indicator", "Role",
    "StatsRow", "Violation", "check_discrimination", "descriptive_stats",
    "load_csv", "load_stats_spec", "render_csv", "synthesize_matching",
    "validate",
    "DataError", "DeaError", "ModelError", "SolverError", "SynthesisError",
    "LPSolution", "StandardFormLP", "Status", "simplex_backend", "solve",
    "verify_optimality",
    "EfficiencyResult", "ModelInstance", "ModelKind", "ModelSpec",
    "Projection", "RateReport", "ReturnsToScale", "SbmRecovery",
    "build_instance", "evaluate_all", "evaluate_ccr_output",
    "evaluate_sbm_undesirable", "improvement_targets", "linearize_sbm",
    "Column", "Table", "render_table",
    "__version__",
]
