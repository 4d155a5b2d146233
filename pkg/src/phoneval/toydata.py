"""Deterministic toy fixture: a small feature table, rewrite/split rules,
a multi-speaker aligned corpus and per-utterance representation matrices.

Everything derives from one seed, so two builds with the same arguments
are byte-identical. Matrices are either one-hot phone indicators (read
off the frame targets) or i.i.d. Gaussian noise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import (
    AlignedSegment,
    Corpus,
    FilterRules,
    Utterance,
    filter_corpus,
    frame_count,
    frame_targets,
    write_alignments,
)
from .matrixio import RepresentationMatrix, write_matrix
from .phoneset import CollapsedTable, FeatureTable, Rules, collapse_table

FRAME = 0.02  # 50 fps grid
SIL = "sil"

# 22 ternary features per segment; "ɑ" intentionally duplicates "a" so the
# collapse step has work to do
_FEATURE_NAMES = [
    "syl", "son", "cons", "cont", "delrel", "lat", "nas", "strid", "voi", "sg", "cg",
    "ant", "cor", "distr", "lab", "hi", "lo", "back", "round", "velaric", "tense", "long",
]
_TOY_FEATURES = {
    "a": "++-+---0+--0-0--+--0+-",
    "ɑ": "++-+---0+--0-0--+--0+-",
    "e": "++-+---0+--0-0-----0+-",
    "i": "++-+---0+--0-0-+---0+-",
    "o": "++-+---0+--0-0+--+-0+-",
    "u": "++-+---0+--0-0++-+-0+-",
    "m": "-++----0+--+-0+----0--",
    "n": "-++----0+--++0-----0--",
    "t": "--+----0---++0-----0--",
    "k": "--+----0-----0-+-+-0--",
    "s": "--++---+---++0-----0--",
    "g": "--+----0+----0-+-+-0--",
    "t͡ʃ": "--+-+--+---+-+-----0--",
}
# raw labels as an aligner might emit them; the rules file repairs them
_RAW_POOL = ["a", "e", "i", "o", "u", "m", "n", "t", "k", "s", "tʃ", "ɡ", "aɪ", "ɑ"]
_RULES_LINES = [
    ("REWRITE", "tʃ", "t͡ʃ"),
    ("REWRITE", "ɡ", "g"),  # LATIN SMALL LETTER SCRIPT G -> g
    ("SPLIT", "aɪ", "a,i"),
]


def toy_table() -> FeatureTable:
    entries = {}
    for segment, chars in _TOY_FEATURES.items():
        assert len(chars) == len(_FEATURE_NAMES), segment
        entries[segment] = np.array(
            [{"+": 1, "0": 0, "-": -1}[c] for c in chars], dtype=np.int8
        )
    return FeatureTable(list(_FEATURE_NAMES), entries)


def toy_rules() -> Rules:
    rewrites = [(a, b) for kind, a, b in _RULES_LINES if kind == "REWRITE"]
    splits = {a: b.split(",") for kind, a, b in _RULES_LINES if kind == "SPLIT"}
    return Rules(rewrites, splits)


def write_table_csv(path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("segment," + ",".join(_FEATURE_NAMES) + "\n")
        for segment, chars in _TOY_FEATURES.items():
            f.write(segment + "," + ",".join(chars) + "\n")


def write_rules_tsv(path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for kind, a, b in _RULES_LINES:
            f.write(f"{kind}\t{a}\t{b}\n")


def _raw_edge_classes(pool: list[str]) -> dict[str, tuple[str, str]]:
    """First and last collapsed class of each raw label (multiphthong aware)."""
    from .phoneset import normalize_segment

    table = collapse_table(toy_table())
    rules = toy_rules()
    edges = {}
    for raw in pool:
        norm = normalize_segment(raw, rules.rewrites)
        comps = rules.splits.get(norm, [norm])
        reps = [table.representatives[table.class_of(c)] for c in comps]
        edges[raw] = (reps[0], reps[-1])
    return edges


def _synth_utterance(
    rng: np.random.Generator,
    utt_id: str,
    speaker: str,
    n_phones: int,
    pool: list[str],
    edges: dict[str, tuple[str, str]],
) -> Utterance:
    segments = []
    t = 0.0

    def add(phone: str, frames: int):
        nonlocal t
        segments.append(AlignedSegment(phone, round(t, 6), round(t + frames * FRAME, 6)))
        t += frames * FRAME

    add(SIL, 5)
    last_class = None
    for _ in range(n_phones):
        # avoid class-adjacent repeats: identical neighbouring phones merge
        # into one run and defeat run-level discrimination
        phone = pool[rng.integers(len(pool))]
        while last_class is not None and edges[phone][0] == last_class:
            phone = pool[rng.integers(len(pool))]
        frames = int(rng.integers(2, 6))
        if phone == "aɪ":
            # keep multiphthong halves on the frame grid
            frames = 2 * int(rng.integers(1, 3))
        add(phone, frames)
        last_class = edges[phone][1]
        if rng.random() < 0.05:
            add(SIL, int(rng.integers(2, 5)))
            last_class = None
    add(SIL, 5)
    return Utterance(utt_id, speaker, "toy", segments)


def toy_corpus(
    seed: int = 0,
    n_speakers: int = 3,
    utts_per_speaker: int = 4,
    phones_per_utt: int = 40,
    include_rejects: bool = False,
    phone_pool: list[str] | None = None,
) -> Corpus:
    """Speakers of frame-aligned utterances around 2.5-4 s each. With
    include_rejects, adds one violator per filtering rule (spn segment,
    over-long phone, too short, too long)."""
    rng = np.random.default_rng(seed)
    pool = list(_RAW_POOL if phone_pool is None else phone_pool)
    edges = _raw_edge_classes(pool)
    utts = []
    for s in range(n_speakers):
        speaker = f"spk{s}"
        for u in range(utts_per_speaker):
            n = int(phones_per_utt + rng.integers(0, phones_per_utt // 2 + 1))
            utts.append(_synth_utterance(rng, f"{speaker}_u{u:02d}", speaker, n, pool, edges))
    if include_rejects:
        utts.append(
            Utterance("rej_spn", "spk0", "toy", [
                AlignedSegment(SIL, 0.0, 0.1),
                AlignedSegment("spn", 0.1, 0.3),
                AlignedSegment("a", 0.3, 2.3),
            ])
        )
        utts.append(
            Utterance("rej_longphone", "spk0", "toy", [
                AlignedSegment(SIL, 0.0, 0.1),
                AlignedSegment("a", 0.1, 0.7),  # 0.6 s vowel
                AlignedSegment("t", 0.7, 0.8),
                AlignedSegment(SIL, 0.8, 2.4),
            ])
        )
        utts.append(
            Utterance("rej_short", "spk1", "toy", [
                AlignedSegment(SIL, 0.0, 0.1),
                AlignedSegment("a", 0.1, 0.2),
                AlignedSegment(SIL, 0.2, 1.5),
            ])
        )
        long_segments = [AlignedSegment(SIL, 0.0, 0.1)]
        t = 0.1
        while t < 24.9:
            long_segments.append(AlignedSegment("a", round(t, 6), round(t + 0.1, 6)))
            t += 0.1
        utts.append(Utterance("rej_long", "spk1", "toy", long_segments))
    return Corpus(utts)


def one_hot_matrix(utt: Utterance, table: CollapsedTable, rules: Rules, frame_rate: float = 1 / FRAME) -> RepresentationMatrix:
    targets = frame_targets(utt, frame_rate, table, rules)
    data = np.zeros((len(targets), table.n_classes), dtype=np.float32)
    voiced = targets.phone_class >= 0
    data[np.flatnonzero(voiced), targets.phone_class[voiced]] = 1.0
    return RepresentationMatrix(data, frame_rate)


def noise_matrix(utt: Utterance, rng: np.random.Generator, dim: int = 8, frame_rate: float = 1 / FRAME) -> RepresentationMatrix:
    n = frame_count(utt.duration, frame_rate)
    return RepresentationMatrix(rng.standard_normal((n, dim)).astype(np.float32), frame_rate)


def write_toy_fixture(
    root,
    seed: int = 0,
    kind: str = "one_hot",
    n_speakers: int = 3,
    utts_per_speaker: int = 4,
    phones_per_utt: int = 40,
    include_rejects: bool = True,
    phone_pool: list[str] | None = None,
    noise_dim: int = 8,
) -> dict:
    """Write table.csv, rules.tsv, corpus.tsv, gold.txt, matrices/ and a
    ready-to-run config.ini under root. Returns the path map."""
    root = Path(root)
    (root / "matrices").mkdir(parents=True, exist_ok=True)
    paths = {
        "table": root / "table.csv",
        "rules": root / "rules.tsv",
        "corpus": root / "corpus.tsv",
        "gold": root / "gold.txt",
        "matrix_dir": root / "matrices",
        "config": root / "config.ini",
        "output_dir": root / "out",
    }
    write_table_csv(paths["table"])
    write_rules_tsv(paths["rules"])
    corpus = toy_corpus(
        seed, n_speakers, utts_per_speaker, phones_per_utt,
        include_rejects=include_rejects, phone_pool=phone_pool,
    )
    write_alignments(corpus, paths["corpus"])

    table = collapse_table(toy_table())
    rules = toy_rules()
    rng = np.random.default_rng(seed + 1)
    observed = set()
    survivors = filter_corpus(corpus, FilterRules())
    for utt in survivors.utterances:
        targets = frame_targets(utt, 1 / FRAME, table, rules)
        observed.update(int(c) for c in targets.phone_class[targets.phone_class >= 0])
        if kind == "one_hot":
            matrix = one_hot_matrix(utt, table, rules)
        elif kind == "noise":
            matrix = noise_matrix(utt, rng, noise_dim)
        else:
            raise ValueError(f"unknown fixture kind {kind!r}")
        write_matrix(matrix, paths["matrix_dir"] / f"{utt.id}.maub")
    with open(paths["gold"], "w", encoding="utf-8") as f:
        for cls in sorted(observed):
            f.write(table.representatives[cls] + "\n")
    with open(paths["config"], "w", encoding="utf-8") as f:
        f.write(
            "[paths]\n"
            f"table = {paths['table']}\n"
            f"rules = {paths['rules']}\n"
            f"corpus = {paths['corpus']}\n"
            f"matrix_dir = {paths['matrix_dir']}\n"
            f"gold_inventory = {paths['gold']}\n"
            f"output_dir = {paths['output_dir']}\n"
            "\n[params]\n"
            f"frame_rate = {1 / FRAME:g}\n"
            "speaker = within\ncontext = within\nspan = triphone\nmetric = angular\njobs = 1\n"
            "\n[seeds]\nsplit = 0\nkmeans = 0\nsample = 0\ncap = 0\n"
        )
    return paths
