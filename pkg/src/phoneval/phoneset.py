"""IPA segment to ternary articulatory-feature table.

The table is a UTF-8 CSV whose header row is ``segment,<feature_1>,...``
and whose cells are exactly "+", "-" or "0".  Vectors are stored as int8
arrays with the encoding + -> 1, 0 -> 0, - -> -1.

A companion rules file (UTF-8, tab-separated) carries corpus-specific
segment fixes, one per line::

    REWRITE<TAB>pattern<TAB>replacement
    SPLIT<TAB>multiphthong<TAB>comp1,comp2[,comp3...]

REWRITE lines drive normalize_segment; SPLIT lines name multiphthongs
and their monophthong components.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ToolkitError

PLUS, ZERO, MINUS = 1, 0, -1
_CHAR_TO_VALUE = {"+": PLUS, "0": ZERO, "-": MINUS}
_VALUE_TO_CHAR = {PLUS: "+", ZERO: "0", MINUS: "-"}
# fixed lexicographic order for vector tie-breaks: + < 0 < -
_LEX_RANK = {PLUS: 0, ZERO: 1, MINUS: 2}


class DuplicateSegment(ToolkitError):
    pass


class MalformedFeatureCell(ToolkitError):
    pass


class MalformedRow(ToolkitError):
    pass


class UnknownSegment(ToolkitError):
    """Lookup failure; carries the offending segment string."""

    def __init__(self, segment: str, context: str = ""):
        self.segment = segment
        msg = f"unknown segment {segment!r}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class EmptyMultiphthong(ToolkitError):
    pass


class CyclicRules(ToolkitError):
    pass


def vector_to_string(vector) -> str:
    return "".join(_VALUE_TO_CHAR[int(v)] for v in vector)


def string_to_vector(chars: str) -> np.ndarray:
    try:
        return np.array([_CHAR_TO_VALUE[c] for c in chars], dtype=np.int8)
    except KeyError as e:
        raise MalformedFeatureCell(f"feature value {e.args[0]!r} not in +/-/0") from None


def lex_key(vector) -> tuple:
    """Sort key implementing the fixed + < 0 < - element order."""
    return tuple(_LEX_RANK[int(v)] for v in vector)


@dataclass
class FeatureTable:
    feature_names: list[str]
    entries: dict[str, np.ndarray]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, segment: str) -> bool:
        return segment in self.entries


@dataclass
class CollapsedTable:
    """Feature table reduced to distinct vectors, each named by its
    lexicographically smallest segment."""

    feature_names: list[str]
    representatives: list[str]
    vectors: np.ndarray  # (n_classes, n_features) int8
    segment_to_class: dict[str, int]

    @property
    def n_classes(self) -> int:
        return len(self.representatives)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def class_of(self, segment: str) -> int:
        try:
            return self.segment_to_class[segment]
        except KeyError:
            raise UnknownSegment(segment) from None


def load_feature_table(path) -> FeatureTable:
    """Load the segment,feature CSV. Cells must be +, - or 0."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(f"{path}: empty file") from None
        if not header or header[0] != "segment":
            raise MalformedRow(f"{path}: first header column must be 'segment'")
        feature_names = header[1:]
        if not feature_names:
            raise MalformedRow(f"{path}: no feature columns")
        entries: dict[str, np.ndarray] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            segment = row[0]
            if segment in entries:
                raise DuplicateSegment(f"{path}:{lineno}: duplicate segment {segment!r}")
            for cell in row[1:]:
                if cell not in _CHAR_TO_VALUE:
                    raise MalformedFeatureCell(f"{path}:{lineno}: bad cell {cell!r}")
            entries[segment] = np.array([_CHAR_TO_VALUE[c] for c in row[1:]], dtype=np.int8)
    return FeatureTable(feature_names, entries)


def lookup(table: FeatureTable, segment: str) -> np.ndarray:
    try:
        return table.entries[segment]
    except KeyError:
        raise UnknownSegment(segment) from None


def normalize_segment(raw: str, rules: list[tuple[str, str]]) -> str:
    """Apply exact-substring rewrites left-to-right until a fixpoint.

    At each position the longest matching pattern wins; equal lengths go to
    the earlier rule. Re-running passes until the string stops changing
    keeps the result idempotent for cascading (acyclic) rule sets.
    """
    if not rules:
        return raw
    ordered = sorted(range(len(rules)), key=lambda i: (-len(rules[i][0]), i))
    patterns = [(rules[i][0], rules[i][1]) for i in ordered if rules[i][0]]
    current = raw
    for _ in range(max(64, 4 * len(rules))):
        out: list[str] = []
        i = 0
        changed = False
        while i < len(current):
            for pat, repl in patterns:
                if current.startswith(pat, i):
                    out.append(repl)
                    i += len(pat)
                    changed = changed or pat != repl
                    break
            else:
                out.append(current[i])
                i += 1
        nxt = "".join(out)
        if not changed or nxt == current:
            return nxt
        current = nxt
    raise CyclicRules(f"rewrite rules do not terminate on {raw!r}")


def collapse_table(table: FeatureTable) -> CollapsedTable:
    """Group segments sharing one vector; class representative is the
    code-point-smallest segment; classes ordered by representative."""
    groups: dict[bytes, list[str]] = {}
    vec_of: dict[bytes, np.ndarray] = {}
    for segment, vector in table.entries.items():
        key = vector.tobytes()
        groups.setdefault(key, []).append(segment)
        vec_of[key] = vector
    reps = sorted((min(segments), key) for key, segments in groups.items())
    representatives = [rep for rep, _ in reps]
    vectors = np.stack([vec_of[key] for _, key in reps]) if reps else np.zeros((0, table.n_features), np.int8)
    class_index = {key: idx for idx, (_, key) in enumerate(reps)}
    segment_to_class = {seg: class_index[vec.tobytes()] for seg, vec in table.entries.items()}
    return CollapsedTable(list(table.feature_names), representatives, vectors, segment_to_class)


def split_multiphthong(
    component_segments: list[str],
    duration: float,
    frame_rate: float | None = None,
) -> list[tuple[str, float]]:
    """Split a multiphthong of the given duration into uniform parts.

    With frame_rate set, the first n-1 part durations are snapped to the
    frame grid and the last part absorbs the residue, so durations always
    sum exactly to the input.
    """
    if not component_segments:
        raise EmptyMultiphthong("no component segments")
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    n = len(component_segments)
    if n == 1:
        return [(component_segments[0], duration)]
    if frame_rate is None:
        part = duration / n
    else:
        part = round(duration / n * frame_rate) / frame_rate
    parts = [(seg, part) for seg in component_segments[:-1]]
    parts.append((component_segments[-1], duration - part * (n - 1)))
    return parts


@dataclass
class Rules:
    """Parsed rules file: ordered rewrites plus multiphthong decompositions."""

    rewrites: list[tuple[str, str]] = field(default_factory=list)
    splits: dict[str, list[str]] = field(default_factory=dict)


EMPTY_RULES = Rules()


def load_rules(path) -> Rules:
    rewrites: list[tuple[str, str]] = []
    splits: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise MalformedRow(f"{path}:{lineno}: expected 3 tab-separated fields")
            kind, a, b = fields
            if kind == "REWRITE":
                rewrites.append((a, b))
            elif kind == "SPLIT":
                components = [c for c in b.split(",") if c]
                if not components:
                    raise EmptyMultiphthong(f"{path}:{lineno}: SPLIT with no components")
                splits[a] = components
            else:
                raise MalformedRow(f"{path}:{lineno}: unknown rule kind {kind!r}")
    # components are looked up after normalisation, so normalise them here too
    splits = {m: [normalize_segment(c, rewrites) for c in comps] for m, comps in splits.items()}
    return Rules(rewrites, splits)
