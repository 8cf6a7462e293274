"""Long-term visual tracking evaluation toolkit."""

from .core import (
    AttributeCode,
    Box,
    FramePrediction,
    FrameTruth,
    PrCurve,
    PrPoint,
    SequenceTruth,
    TrackerRun,
    average_curves,
    f_score,
    max_f,
    overlap,
    pr_re_at,
    pr_re_thresholded,
    sequence_curve,
    threshold_axis,
)
from .errors import AlignmentError, LtEvalError, ParseError
from .protocol import EvalReport, count_disappearances, evaluate_tracker, group_sequences

__version__ = "0.1.0"
