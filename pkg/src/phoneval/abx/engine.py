"""End-to-end ABX evaluation over representation matrices.

Cells are independent work units. With jobs > 1 they are scored by a
process pool, but results are reduced in the fixed sorted-cell order,
so the report is byte-identical for any worker count.
"""

from __future__ import annotations

import multiprocessing as mp

import numpy as np

from ..corpus import Corpus, DEFAULT_SILENCE_LABELS
from ..errors import ToolkitError
from ..phoneset import CollapsedTable, Rules
from .dtw import dtw_distance
from .items import AbxItem, extract_items
from .score import AbxScore, DEFAULT_AGGREGATION, SkippedUnit, aggregate, score_cell
from .task import AbxTaskCell, Condition, build_task


class MissingRepresentation(ToolkitError):
    pass


def materialize_item_arrays(items: list[AbxItem], representations, span: str) -> list[np.ndarray]:
    """Slice each item's frames (per the span) out of its utterance matrix.

    representations maps utterance id to a RepresentationMatrix or a bare
    2-D array. Raises MissingRepresentation when an utterance has no
    matrix or the matrix is shorter than the item span.
    """
    arrays = []
    for it in items:
        try:
            matrix = representations[it.file]
        except KeyError:
            raise MissingRepresentation(f"no representation matrix for utterance {it.file!r}") from None
        data = getattr(matrix, "data", matrix)
        f0, f1 = it.span_frames(span)
        if f1 > len(data):
            raise MissingRepresentation(
                f"matrix for {it.file!r} has {len(data)} frames, item needs {f1}"
            )
        arrays.append(np.asarray(data[f0:f1], dtype=np.float64))
    return arrays


class _ArrayDistance:
    """Pairwise DTW over item arrays with a symmetric memo."""

    def __init__(self, arrays: list[np.ndarray], metric: str):
        self.arrays = arrays
        self.metric = metric
        self.memo: dict[tuple[int, int], float] = {}

    def __call__(self, i: int, j: int) -> float:
        key = (i, j) if i <= j else (j, i)
        d = self.memo.get(key)
        if d is None:
            d = dtw_distance(self.arrays[key[0]], self.arrays[key[1]], self.metric)
            self.memo[key] = d
        return d


_WORKER: dict = {}


def _init_worker(arrays, metric, cells):
    _WORKER["distance"] = _ArrayDistance(arrays, metric)
    _WORKER["cells"] = cells


def _score_one(index: int):
    try:
        return score_cell(_WORKER["cells"][index], _WORKER["distance"])
    except SkippedUnit:
        return None


def score_cells(
    cells: list[AbxTaskCell],
    arrays: list[np.ndarray],
    metric: str = "angular",
    jobs: int = 1,
) -> list[tuple[float, int] | None]:
    """Score every cell; None marks skipped cells. Order follows cells."""
    if jobs <= 1:
        _init_worker(arrays, metric, cells)
        return [_score_one(i) for i in range(len(cells))]
    ctx = mp.get_context("fork")
    with ctx.Pool(jobs, initializer=_init_worker, initargs=(arrays, metric, cells)) as pool:
        return pool.map(_score_one, range(len(cells)), chunksize=max(1, len(cells) // (4 * jobs)))


def evaluate_task(
    cells: list[AbxTaskCell],
    distance,
    condition_label: str = "",
    aggregation=DEFAULT_AGGREGATION,
) -> AbxScore:
    """Score cells against an arbitrary distance oracle and aggregate."""
    results = []
    for cell in cells:
        try:
            results.append(score_cell(cell, distance))
        except SkippedUnit:
            results.append(None)
    return aggregate(cells, results, condition_label, aggregation)


def abx_error(
    corpus: Corpus,
    representations,
    condition: Condition,
    table: CollapsedTable,
    rules: Rules = Rules(),
    frame_rate: float = 50.0,
    metric: str = "angular",
    jobs: int = 1,
    aggregation=DEFAULT_AGGREGATION,
    silence_labels=DEFAULT_SILENCE_LABELS,
) -> AbxScore:
    """Full pipeline: items, task cells, DTW distances, aggregated error."""
    items = extract_items(corpus, table, rules, frame_rate, silence_labels)
    return abx_error_from_items(items, representations, condition, metric, jobs, aggregation)


def abx_error_from_items(
    items: list[AbxItem],
    representations,
    condition: Condition,
    metric: str = "angular",
    jobs: int = 1,
    aggregation=DEFAULT_AGGREGATION,
) -> AbxScore:
    cells = build_task(items, condition)
    arrays = materialize_item_arrays(items, representations, condition.span)
    results = score_cells(cells, arrays, metric, jobs)
    return aggregate(cells, results, condition.label, aggregation)
