"""Evaluation toolkit for structured 3D wireframe reconstructions.

Submodules: geometry (data model + primitives), metrics (the score
registry), corruptions (seeded damage operators), harness (the metric
property battery), ranking (preference analysis), service (annotation
planning and HTTP API), report (figures + tsv tables), cli.
"""

from __future__ import annotations

from .corruptions import (
    CORRUPTION_KINDS,
    SEVERITIES,
    CorruptionLineage,
    CorruptionSpec,
    corrupt,
    make_spec,
)
from .geometry import (
    PointSample,
    Wireframe,
    WireframeError,
    WireframeParseError,
    WireframeValidationError,
    load_wireframe,
    parse_obj_lines,
    parse_wireframe_json,
    sample_edges,
    save_wireframe,
)
from .harness import BATTERY_TESTS, PASS_THRESHOLD, PropertyReport, run_battery
from .metrics import JUDGE_METRICS, METRICS, MetricResult, evaluate
from .ranking import (
    ChoiceRecord,
    RankingTable,
    agreement,
    agreement_matrix,
    bootstrap_stability,
    fit_bt,
    kendall_tau,
    load_records,
    metric_as_judge,
    panel_error,
    ranking_table,
    save_records,
    svd_quality,
    to_elo,
    win_rates,
)
from .service import (
    ComparisonPlan,
    RecordStore,
    Session,
    WireframeStore,
    build_plan,
    create_app,
    load_plan,
    rater_reliability,
    save_plan,
)
from .synthetic import generate_corpus, generate_house

__version__ = "0.1.0"

__all__ = [
    "CORRUPTION_KINDS",
    "SEVERITIES",
    "CorruptionLineage",
    "CorruptionSpec",
    "corrupt",
    "make_spec",
    "PointSample",
    "Wireframe",
    "WireframeError",
    "WireframeParseError",
    "WireframeValidationError",
    "load_wireframe",
    "parse_obj_lines",
    "parse_wireframe_json",
    "sample_edges",
    "save_wireframe",
    "BATTERY_TESTS",
    "PASS_THRESHOLD",
    "PropertyReport",
    "run_battery",
    "JUDGE_METRICS",
    "METRICS",
    "MetricResult",
    "evaluate",
    "ChoiceRecord",
    "RankingTable",
    "agreement",
    "agreement_matrix",
    "bootstrap_stability",
    "fit_bt",
    "kendall_tau",
    "load_records",
    "metric_as_judge",
    "panel_error",
    "ranking_table",
    "save_records",
    "svd_quality",
    "to_elo",
    "win_rates",
    "ComparisonPlan",
    "RecordStore",
    "Session",
    "WireframeStore",
    "build_plan",
    "create_app",
    "load_plan",
    "rater_reliability",
    "save_plan",
    "generate_corpus",
    "generate_house",
]
