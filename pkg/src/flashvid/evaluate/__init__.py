from .aggregate import (
    GROUP_FIELDS,
    Z_95,
    AggregateRow,
    aggregate_scores,
    confidence_half_width,
    write_aggregate_csv,
)
from .rubric import CATEGORIES, METRIC_KEYS, RUBRIC, EvalMetric, rubric_by_key
from .scorer import (
    CONDITION_MULTI,
    CONDITION_SINGLE,
    EVAL_FRAME_COUNT,
    EvaluationReport,
    category_means,
    evaluate_video,
)

__all__ = [
    "AggregateRow",
    "CATEGORIES",
    "CONDITION_MULTI",
    "CONDITION_SINGLE",
    "EVAL_FRAME_COUNT",
    "EvalMetric",
    "EvaluationReport",
    "GROUP_FIELDS",
    "METRIC_KEYS",
    "RUBRIC",
    "Z_95",
    "aggregate_scores",
    "category_means",
    "confidence_half_width",
    "evaluate_video",
    "rubric_by_key",
    "write_aggregate_csv",
]
