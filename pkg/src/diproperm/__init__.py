"""Two-sample testing for high-dimensional data via direction, projection,
and permutation, with a distance-weighted-discrimination direction solver."""

from .dataset import (
    LabeledDataset,
    load_dense,
    load_labels,
    load_sparse,
    mushrooms50,
    subset_rows,
    synthetic_blobs,
    write_dense,
    write_labels,
    write_sparse,
)
from .direction import (
    Direction,
    DwdModel,
    Loading,
    dwd_direction,
    dwd_loss,
    dwd_loss_grad,
    loadings_of,
    md_direction,
    penalty_parameter,
)
from .engine import (
    DppResult,
    PermutationRecord,
    TestConfig,
    cutoff,
    diproperm,
    p_value,
    z_score,
)
from .permute import PermutationPlan, derive_stream, permute_labels
from .report import (
    DiagnosticsBundle,
    emit_bundle,
    emit_permdist_csv,
    emit_permdist_svg,
    emit_result_json,
    emit_score_panel_svg,
    emit_scores_csv,
    load_result_json,
)
from .unistat import ProjectionScores, project, stat_md, stat_med, stat_t

__version__ = "0.1.0"

__all__ = [
    "LabeledDataset", "load_dense", "load_labels", "load_sparse",
    "mushrooms50", "subset_rows", "synthetic_blobs", "write_dense",
    "write_labels", "write_sparse",
    "Direction", "DwdModel", "Loading", "dwd_direction", "dwd_loss",
    "dwd_loss_grad", "loadings_of", "md_direction", "penalty_parameter",
    "DppResult", "PermutationRecord", "TestConfig", "cutoff", "diproperm",
    "p_value", "z_score",
    "PermutationPlan", "derive_stream", "permute_labels",
    "DiagnosticsBundle", "emit_bundle", "emit_permdist_csv",
    "emit_permdist_svg", "emit_result_json", "emit_score_panel_svg",
    "emit_scores_csv", "load_result_json",
    "ProjectionScores", "project", "stat_md", "stat_med", "stat_t",
]
