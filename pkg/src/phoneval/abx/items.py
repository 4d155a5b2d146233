"""Triphone item extraction and the challenge-style item file format."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..corpus import Corpus, DEFAULT_SILENCE_LABELS, Utterance, frame_count, resolve_segments
from ..phoneset import CollapsedTable, Rules

BOUNDARY = "#"
ITEM_HEADER = "#file onset offset #phone prev-phone next-phone speaker"
_EPS = 1e-9


@dataclass(frozen=True)
class AbxItem:
    file: str
    onset: float  # centre-phone span, seconds on the frame grid
    offset: float
    phone: str
    prev: str
    next: str
    speaker: str
    frames: tuple[int, int]  # centre span [start, end)
    ctx_frames: tuple[int, int]  # triphone span [start, end)

    def span_frames(self, span: str) -> tuple[int, int]:
        return self.frames if span == "phoneme" else self.ctx_frames


def _snap(start: float, end: float, rate: float, n_frames: int) -> tuple[int, int]:
    f0 = max(0, int(math.floor(start * rate + _EPS)))
    f1 = min(n_frames, int(math.ceil(end * rate - _EPS)))
    return f0, f1


def extract_items(
    corpus: Corpus,
    table: CollapsedTable,
    rules: Rules = Rules(),
    frame_rate: float = 50.0,
    silence_labels=DEFAULT_SILENCE_LABELS,
) -> list[AbxItem]:
    """One item per non-silence phone occurrence, in collapsed-class labels.

    Neighbours at utterance edges or across silence are the boundary label
    "#". Spans snap outward to whole frames; the triphone window covers the
    real neighbour phones only (a "#" side adds no frames). Items whose
    centre ends up with zero frames are dropped.
    """
    items: list[AbxItem] = []
    for utt in corpus.utterances:
        items.extend(_utterance_items(utt, table, rules, frame_rate, silence_labels))
    return items


def _utterance_items(utt: Utterance, table, rules, rate, silence_labels):
    n_frames = frame_count(utt.duration, rate)
    spans = resolve_segments(utt, table, rules, silence_labels)
    out = []
    for k, (cls, start, end) in enumerate(spans):
        if cls is None:
            continue
        f0, f1 = _snap(start, end, rate, n_frames)
        if f1 <= f0:
            continue
        prev_span = spans[k - 1] if k > 0 else None
        next_span = spans[k + 1] if k + 1 < len(spans) else None
        prev_label, c0 = BOUNDARY, f0
        if prev_span is not None and prev_span[0] is not None:
            prev_label = table.representatives[prev_span[0]]
            c0 = min(c0, _snap(prev_span[1], prev_span[2], rate, n_frames)[0])
        next_label, c1 = BOUNDARY, f1
        if next_span is not None and next_span[0] is not None:
            next_label = table.representatives[next_span[0]]
            c1 = max(c1, _snap(next_span[1], next_span[2], rate, n_frames)[1])
        out.append(
            AbxItem(
                file=utt.id,
                onset=f0 / rate,
                offset=f1 / rate,
                phone=table.representatives[cls],
                prev=prev_label,
                next=next_label,
                speaker=utt.speaker,
                frames=(f0, f1),
                ctx_frames=(c0, c1),
            )
        )
    return out


def write_item_file(items: list[AbxItem], path, frame_rate: float, span: str = "triphone") -> None:
    """Write a space-separated item file. Onset/offset carry the span the
    file is meant to score (triphone window or centre phone)."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(ITEM_HEADER + "\n")
        for it in items:
            f0, f1 = it.span_frames(span)
            f.write(
                f"{it.file} {f0 / frame_rate:.4f} {f1 / frame_rate:.4f} "
                f"{it.phone} {it.prev} {it.next} {it.speaker}\n"
            )


def read_item_file(path, frame_rate: float) -> list[AbxItem]:
    """Load items back; both spans are set to the file's onset/offset."""
    items = []
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if header != ITEM_HEADER:
            raise ValueError(f"{path}: unexpected item header {header!r}")
        for line in f:
            fields = line.split()
            if not fields:
                continue
            file, onset, offset, phone, prev, nxt, speaker = fields
            f0 = int(round(float(onset) * frame_rate))
            f1 = int(round(float(offset) * frame_rate))
            items.append(
                AbxItem(file, f0 / frame_rate, f1 / frame_rate, phone, prev, nxt, speaker,
                        (f0, f1), (f0, f1))
            )
    return items
