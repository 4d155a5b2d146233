"""ABX task construction: conditions and scoring cells.

A cell fixes one unordered pair of centre phones inside one grouping of
the items. Groupings follow the evaluation condition: within-context
fixes the flanking (prev, next) pair across A, B and X; within-speaker
draws all three roles from one speaker; across-speaker draws A and B
from speaker s1 and X from a single other speaker s2, enumerating
ordered (s1, s2) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from ..errors import ToolkitError
from .items import AbxItem

SPEAKER_MODES = ("within", "across")
CONTEXT_MODES = ("within", "any")
SPANS = ("triphone", "phoneme")

ANY_CONTEXT = ("*", "*")


class InvalidCondition(ToolkitError):
    pass


@dataclass(frozen=True)
class Condition:
    speaker_mode: str = "within"
    context_mode: str = "within"
    span: str = "triphone"

    def __post_init__(self):
        if self.speaker_mode not in SPEAKER_MODES:
            raise InvalidCondition(f"speaker_mode must be one of {SPEAKER_MODES}")
        if self.context_mode not in CONTEXT_MODES:
            raise InvalidCondition(f"context_mode must be one of {CONTEXT_MODES}")
        if self.span not in SPANS:
            raise InvalidCondition(f"span must be one of {SPANS}")
        if self.context_mode == "any" and self.span == "triphone":
            raise InvalidCondition("any-context evaluation requires the phoneme span")

    @property
    def label(self) -> str:
        return f"{self.speaker_mode}-speaker_{self.context_mode}-context_{self.span}"


@dataclass
class AbxTaskCell:
    """One scoring unit: a phone pair under a fixed grouping.

    x_a / x_b are the X pools when A is phone_a resp. phone_b. None means
    within-speaker pooling: X comes from the A side itself, minus the
    current a token.
    """

    context: tuple[str, str]
    speakers: tuple[str, ...]  # (spk,) within, (s1, s2) across
    phone_a: str
    phone_b: str
    a_items: list[int]
    b_items: list[int]
    x_a: list[int] | None
    x_b: list[int] | None

    @property
    def key(self):
        return (self.phone_a, self.phone_b, self.speakers, self.context)


def build_task(items: list[AbxItem], condition: Condition) -> list[AbxTaskCell]:
    """Enumerate all scoring cells for the items under the condition."""
    groups: dict[tuple, dict[str, dict[str, list[int]]]] = {}
    for idx, it in enumerate(items):
        ctx = (it.prev, it.next) if condition.context_mode == "within" else ANY_CONTEXT
        groups.setdefault(ctx, {}).setdefault(it.speaker, {}).setdefault(it.phone, []).append(idx)

    cells: list[AbxTaskCell] = []
    for ctx in sorted(groups):
        by_speaker = groups[ctx]
        if condition.speaker_mode == "within":
            for spk in sorted(by_speaker):
                by_phone = by_speaker[spk]
                for p, q in combinations(sorted(by_phone), 2):
                    cells.append(
                        AbxTaskCell(ctx, (spk,), p, q, by_phone[p], by_phone[q], None, None)
                    )
        else:
            speakers = sorted(by_speaker)
            for s1 in speakers:
                for s2 in speakers:
                    if s1 == s2:
                        continue
                    by_phone = by_speaker[s1]
                    pool = by_speaker[s2]
                    for p, q in combinations(sorted(by_phone), 2):
                        cells.append(
                            AbxTaskCell(
                                ctx, (s1, s2), p, q,
                                by_phone[p], by_phone[q],
                                pool.get(p, []), pool.get(q, []),
                            )
                        )
    cells.sort(key=lambda c: c.key)
    return cells
