"""Cell scoring and hierarchical aggregation of ABX errors.

A triple (a, b, x) succeeds when d(a, x) < d(b, x); exact ties score
half. The asymmetric error of a direction is one minus the mean triple
score; a cell's error symmetrises the two directions. Cell errors then
collapse level by level: contexts first, then speaker cells, then phone
pairs, the grand mean over pairs being the reported error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ToolkitError
from .task import AbxTaskCell

DEFAULT_AGGREGATION = ("context", "speaker", "pair")


class SkippedUnit(ToolkitError):
    """An X pool came up empty, so the cell cannot be scored."""


def _direction_error(a_items, b_items, x_pool, distance, exclude_a: bool):
    total = 0.0
    n = 0
    for a in a_items:
        xs = [x for x in x_pool if x != a] if exclude_a else x_pool
        if not xs:
            raise SkippedUnit("empty X pool")
        for b in b_items:
            for x in xs:
                dax = distance(a, x)
                dbx = distance(b, x)
                if dax < dbx:
                    total += 1.0
                elif dax == dbx:
                    total += 0.5
                n += 1
    if n == 0:
        raise SkippedUnit("no triples")
    return 1.0 - total / n, n


def score_cell(cell: AbxTaskCell, distance) -> tuple[float, int]:
    """Symmetrised error of one cell and its triple count.

    distance is a callable on two item indices. Raises SkippedUnit when
    either direction has no usable X token.
    """
    x_a = cell.a_items if cell.x_a is None else cell.x_a
    x_b = cell.b_items if cell.x_b is None else cell.x_b
    within = cell.x_a is None
    err_ab, n_ab = _direction_error(cell.a_items, cell.b_items, x_a, distance, within)
    err_ba, n_ba = _direction_error(cell.b_items, cell.a_items, x_b, distance, within)
    return (err_ab + err_ba) / 2.0, n_ab + n_ba


@dataclass
class AbxScore:
    condition_label: str
    error: float
    n_triples: int
    n_cells: int
    n_skipped: int
    # levels: finest "context" = one entry per scored cell, then each
    # aggregation step in order; keys are tuples of the remaining dims
    levels: dict[str, dict[tuple, tuple[float, int]]] = field(default_factory=dict)


def aggregate(
    cells: list[AbxTaskCell],
    results: list[tuple[float, int] | None],
    condition_label: str = "",
    order: tuple[str, ...] = DEFAULT_AGGREGATION,
) -> AbxScore:
    """Collapse per-cell errors in the given dimension order.

    results aligns with cells; None marks a skipped cell. Keys are
    (pair, speakers, context) with collapsed dims removed left to right.
    """
    if sorted(order) != sorted(DEFAULT_AGGREGATION):
        raise ValueError(f"aggregation order must permute {DEFAULT_AGGREGATION}")
    current: dict[tuple, tuple[float, int]] = {}
    n_skipped = 0
    for cell, res in zip(cells, results):
        if res is None:
            n_skipped += 1
            continue
        key = ((cell.phone_a, cell.phone_b), cell.speakers, cell.context)
        current[key] = res
    n_cells = len(current)
    n_triples = sum(n for _, n in current.values())
    remaining = ["pair", "speaker", "context"]
    levels = {_level_name(remaining): dict(sorted(current.items()))}
    for dim in order:
        pos = remaining.index(dim)
        grouped: dict[tuple, list[tuple[float, int]]] = {}
        for key in sorted(current):
            newkey = key[:pos] + key[pos + 1:]
            grouped.setdefault(newkey, []).append(current[key])
        current = {
            k: (sum(e for e, _ in v) / len(v), sum(n for _, n in v))
            for k, v in sorted(grouped.items())
        }
        remaining.pop(pos)
        levels[_level_name(remaining)] = dict(current)
    if current:
        error = sum(e for e, _ in current.values()) / len(current)
    else:
        error = float("nan")
    return AbxScore(condition_label, error, n_triples, n_cells, n_skipped, levels)


def _level_name(remaining: list[str]) -> str:
    """Level label = finest dimension still present in the keys."""
    for dim in ("context", "speaker", "pair"):
        if dim in remaining:
            return dim
    return "overall"
