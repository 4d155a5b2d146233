"""Phone-aligned corpora: ingestion, filtering, frame targets and splits.

Alignments arrive as a UTF-8 TSV with header
``utt_id\tspeaker\tlanguage\tstart_s\tend_s\tphone`` and contiguous rows
per utterance. Times are decimal seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ToolkitError
from .phoneset import CollapsedTable, Rules, UnknownSegment, normalize_segment, split_multiphthong

ALIGNMENT_COLUMNS = ["utt_id", "speaker", "language", "start_s", "end_s", "phone"]
DEFAULT_SILENCE_LABELS = frozenset({"", "sil", "sp", "spn-silence"})

# absorbs float noise when a boundary product like 0.3 * 50 lands a hair
# off an integer; one nanosecond-scale guard, far below any frame size
_GRID_EPS = 1e-9


class OverlapError(ToolkitError):
    pass


class MalformedRow(ToolkitError):
    pass


class InsufficientData(ToolkitError):
    pass


@dataclass(frozen=True)
class AlignedSegment:
    phone: str
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class Utterance:
    id: str
    speaker: str
    language: str
    segments: list[AlignedSegment]

    @property
    def duration(self) -> float:
        return self.segments[-1].end if self.segments else 0.0


@dataclass
class Corpus:
    utterances: list[Utterance]
    by_id: dict[str, Utterance] = field(init=False, repr=False)
    by_speaker: dict[str, list[Utterance]] = field(init=False, repr=False)
    by_language: dict[str, list[Utterance]] = field(init=False, repr=False)

    def __post_init__(self):
        self.by_id = {}
        self.by_speaker = {}
        self.by_language = {}
        for utt in self.utterances:
            if utt.id in self.by_id:
                raise MalformedRow(f"duplicate utterance id {utt.id!r}")
            self.by_id[utt.id] = utt
            self.by_speaker.setdefault(utt.speaker, []).append(utt)
            self.by_language.setdefault(utt.language, []).append(utt)

    def __len__(self) -> int:
        return len(self.utterances)

    @property
    def total_duration(self) -> float:
        return sum(u.duration for u in self.utterances)

    def get(self, utt_id: str) -> Utterance:
        return self.by_id[utt_id]


def load_alignments(path) -> Corpus:
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
        if header != ALIGNMENT_COLUMNS:
            raise MalformedRow(f"{path}: header must be {chr(9).join(ALIGNMENT_COLUMNS)!r}")
        utterances: list[Utterance] = []
        current: Utterance | None = None
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 6:
                raise MalformedRow(f"{path}:{lineno}: expected 6 fields, got {len(fields)}")
            utt_id, speaker, language, start_s, end_s, phone = fields
            try:
                start, end = float(start_s), float(end_s)
            except ValueError:
                raise MalformedRow(f"{path}:{lineno}: non-numeric time") from None
            if not (0 <= start < end):
                raise MalformedRow(f"{path}:{lineno}: bad interval [{start}, {end})")
            if current is None or current.id != utt_id:
                if current is not None:
                    _finish_utterance(current, path)
                    utterances.append(current)
                current = Utterance(utt_id, speaker, language, [])
            elif (speaker, language) != (current.speaker, current.language):
                raise MalformedRow(f"{path}:{lineno}: speaker/language changed within {utt_id!r}")
            current.segments.append(AlignedSegment(phone, start, end))
        if current is not None:
            _finish_utterance(current, path)
            utterances.append(current)
    return Corpus(utterances)


def _finish_utterance(utt: Utterance, path) -> None:
    utt.segments.sort(key=lambda s: (s.start, s.end))
    for a, b in zip(utt.segments, utt.segments[1:]):
        if b.start < a.end:
            raise OverlapError(
                f"{path}: utterance {utt.id!r}: [{a.start}, {a.end}) overlaps [{b.start}, {b.end})"
            )


def write_alignments(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(ALIGNMENT_COLUMNS) + "\n")
        for utt in corpus.utterances:
            for seg in utt.segments:
                f.write(f"{utt.id}\t{utt.speaker}\t{utt.language}\t{seg.start:.6f}\t{seg.end:.6f}\t{seg.phone}\n")


@dataclass(frozen=True)
class FilterRules:
    drop_label: str = "spn"
    max_phone_s: float = 0.5
    min_utt_s: float = 2.0
    max_utt_s: float = 20.0
    silence_labels: frozenset = DEFAULT_SILENCE_LABELS


def filter_corpus(corpus: Corpus, rules: FilterRules = FilterRules()) -> Corpus:
    """Keep utterances with no drop_label segment, no over-long non-silence
    phone, and total duration inside [min_utt_s, max_utt_s] (inclusive)."""
    kept = []
    for utt in corpus.utterances:
        if any(seg.phone == rules.drop_label for seg in utt.segments):
            continue
        if any(
            seg.duration > rules.max_phone_s
            for seg in utt.segments
            if seg.phone not in rules.silence_labels
        ):
            continue
        if not (rules.min_utt_s <= utt.duration <= rules.max_utt_s):
            continue
        kept.append(utt)
    return Corpus(kept)


def frame_count(duration: float, frame_rate: float) -> int:
    return int(math.floor(duration * frame_rate + _GRID_EPS))


@dataclass
class FrameTargets:
    phone_class: np.ndarray  # int32, -1 on silence frames
    feature: np.ndarray  # (n_frames, n_features) int8, zero rows on silence
    silence_mask: np.ndarray  # bool

    def __len__(self) -> int:
        return len(self.phone_class)


def resolve_segments(
    utt: Utterance,
    table: CollapsedTable,
    rules: Rules,
    silence_labels=DEFAULT_SILENCE_LABELS,
):
    """Flatten an utterance into (class_index | None, start, end) spans.

    Silence spans carry None. Multiphthongs named in the rules are split
    uniformly into their components before lookup.
    """
    spans = []
    for seg in utt.segments:
        if seg.phone in silence_labels:
            spans.append((None, seg.start, seg.end))
            continue
        normalized = normalize_segment(seg.phone, rules.rewrites)
        components = rules.splits.get(normalized, [normalized])
        parts = split_multiphthong(components, seg.duration)
        t = seg.start
        for comp, dur in parts:
            try:
                cls = table.class_of(comp)
            except UnknownSegment:
                raise UnknownSegment(comp, f"utt={utt.id} t={seg.start:.3f}") from None
            spans.append((cls, t, t + dur))
            t += dur
    return spans


def frame_targets(
    utt: Utterance,
    frame_rate: float,
    table: CollapsedTable,
    rules: Rules = Rules(),
    silence_labels=DEFAULT_SILENCE_LABELS,
) -> FrameTargets:
    """Label each frame by the span covering its midpoint (i + 0.5)/rate."""
    n = frame_count(utt.duration, frame_rate)
    spans = resolve_segments(utt, table, rules, silence_labels)
    phone_class = np.full(n, -1, dtype=np.int32)
    feature = np.zeros((n, table.n_features), dtype=np.int8)
    silence = np.ones(n, dtype=bool)
    j = 0
    for i in range(n):
        t = (i + 0.5) / frame_rate
        while j + 1 < len(spans) and spans[j + 1][1] <= t:
            j += 1
        if spans and spans[j][1] <= t < spans[j][2] and spans[j][0] is not None:
            cls = spans[j][0]
            phone_class[i] = cls
            feature[i] = table.vectors[cls]
            silence[i] = False
    return FrameTargets(phone_class, feature, silence)


def speaker_disjoint_split(
    corpus: Corpus,
    budgets: tuple[float, float, float],
    seed: int = 0,
    strict: bool = True,
):
    """Greedily assign seed-shuffled speakers to train/valid/test until each
    duration budget is met. No speaker lands in two splits.

    Returns (train, valid, test, report) where report maps split name to
    realized seconds. With strict=True an unmet budget raises
    InsufficientData; otherwise the best effort is returned and the report
    carries the shortfall.
    """
    speakers = sorted(corpus.by_speaker)
    rng = np.random.default_rng(seed)
    order = [speakers[i] for i in rng.permutation(len(speakers))]
    names = ("train", "valid", "test")
    assigned: dict[str, list[str]] = {name: [] for name in names}
    realized = {name: 0.0 for name in names}
    which = 0
    for spk in order:
        while which < 3 and realized[names[which]] >= budgets[which]:
            which += 1
        if which >= 3:
            break
        split = names[which]
        assigned[split].append(spk)
        realized[split] += sum(u.duration for u in corpus.by_speaker[spk])
    shortfall = {
        name: max(0.0, budgets[i] - realized[name]) for i, name in enumerate(names)
    }
    if strict and any(v > 0 for v in shortfall.values()):
        raise InsufficientData(
            "budgets not met: "
            + ", ".join(f"{k} short by {v:.1f}s" for k, v in shortfall.items() if v > 0)
        )
    report = {"realized": realized, "shortfall": shortfall}
    splits = []
    for name in names:
        members = set(assigned[name])
        splits.append(Corpus([u for u in corpus.utterances if u.speaker in members]))
    return splits[0], splits[1], splits[2], report
