from .dtw import EmptySequence, FRAME_METRICS, dtw_distance, frame_distances, min_mean_path
from .engine import (
    MissingRepresentation,
    abx_error,
    abx_error_from_items,
    evaluate_task,
    materialize_item_arrays,
    score_cells,
)
from .items import AbxItem, BOUNDARY, ITEM_HEADER, extract_items, read_item_file, write_item_file
from .score import AbxScore, DEFAULT_AGGREGATION, SkippedUnit, aggregate, score_cell
from .task import AbxTaskCell, Condition, InvalidCondition, build_task

__all__ = [
    "AbxItem",
    "AbxScore",
    "AbxTaskCell",
    "BOUNDARY",
    "Condition",
    "DEFAULT_AGGREGATION",
    "EmptySequence",
    "FRAME_METRICS",
    "ITEM_HEADER",
    "InvalidCondition",
    "MissingRepresentation",
    "SkippedUnit",
    "abx_error",
    "abx_error_from_items",
    "aggregate",
    "build_task",
    "dtw_distance",
    "evaluate_task",
    "extract_items",
    "frame_distances",
    "materialize_item_arrays",
    "min_mean_path",
    "read_item_file",
    "score_cell",
    "score_cells",
    "write_item_file",
]
