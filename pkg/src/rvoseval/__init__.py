"""Evaluation engine and dataset toolkit for long-term referring VOS."""

from .dataset import (
    AttributeTags,
    DatasetIndex,
    DescriptionType,
    EventComplexity,
    ExpressionRecord,
    LengthBucket,
    ObjectRecord,
    Statistics,
    VideoRecord,
    check_selection_criteria,
    compute_statistics,
    event_complexity,
    length_bucket,
    load_manifest,
    occlusion_rate,
    tag_attributes,
)
from .errors import (
    EmptyVideo,
    MalformedRle,
    MissingBoxes,
    MissingPrediction,
    ParseError,
    RvosEvalError,
    SchemaViolation,
    SequenceMismatch,
    ShapeMismatch,
)
from .mask import (
    EMPTY_AGREEMENT_IOU,
    RleMask,
    extract_boundary,
    presence,
    region_iou,
    rle_decode,
    rle_encode,
)
from .metrics import (
    ExpressionMetrics,
    MaskSequence,
    PresenceSets,
    contour_f,
    default_boundary_tolerance,
    evaluate_expression,
    sequence_jf,
    temporal_iou,
    volume_iou,
)
from .motion import (
    ClipDecomposition,
    MotionVectorField,
    clips_to_json,
    decompose,
    estimate_motion,
    to_luma,
)
from .report import (
    EvalConfig,
    EvalReport,
    evaluate_run,
    occlusion_bracket,
    render_report,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeTags", "ClipDecomposition", "DatasetIndex", "DescriptionType",
    "EMPTY_AGREEMENT_IOU", "EmptyVideo", "EvalConfig", "EvalReport",
    "EventComplexity", "ExpressionMetrics", "ExpressionRecord", "LengthBucket",
    "MalformedRle", "MaskSequence", "MissingBoxes", "MissingPrediction",
    "MotionVectorField", "ObjectRecord", "ParseError", "PresenceSets",
    "RleMask", "RvosEvalError", "SchemaViolation", "SequenceMismatch",
    "ShapeMismatch", "Statistics", "VideoRecord", "check_selection_criteria",
    "clips_to_json", "compute_statistics", "contour_f",
    "default_boundary_tolerance", "decompose", "estimate_motion",
    "evaluate_expression", "evaluate_run", "event_complexity",
    "extract_boundary", "length_bucket", "load_manifest", "occlusion_bracket",
    "occlusion_rate", "presence", "region_iou", "render_report", "rle_decode",
    "rle_encode", "sequence_jf", "tag_attributes", "temporal_iou", "to_luma",
    "volume_iou",
]
