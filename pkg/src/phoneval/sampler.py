"""Multilingual balancing: language up-sampling weights, per-language
duration caps and length bucketing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Utterance
from .errors import ToolkitError


class InvalidCount(ToolkitError):
    pass


@dataclass
class LanguageWeights:
    languages: list[str]  # sorted
    probs: np.ndarray  # aligned with languages, sums to 1
    alpha: float

    def as_dict(self) -> dict[str, float]:
        return {lang: float(p) for lang, p in zip(self.languages, self.probs)}


def language_weights(counts: dict[str, float], alpha: float) -> LanguageWeights:
    """p_l proportional to count_l ** alpha, normalised over languages.

    alpha = 1 keeps empirical proportions, alpha = 0 is uniform; values in
    between up-sample low-resource languages.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    languages = sorted(counts)
    if not languages:
        raise InvalidCount("no languages")
    values = np.array([counts[lang] for lang in languages], dtype=np.float64)
    if np.any(values <= 0):
        bad = languages[int(np.argmax(values <= 0))]
        raise InvalidCount(f"count for {bad!r} must be positive")
    unnorm = values ** alpha
    probs = unnorm / unnorm.sum()
    return LanguageWeights(languages, probs, alpha)


def sample_languages(weights: LanguageWeights, n: int, rng: np.random.Generator) -> list[str]:
    """n inverse-CDF draws over the sorted language order."""
    cum = np.cumsum(weights.probs)
    u = rng.random(n)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
    return [weights.languages[i] for i in idx]


def sample_language(weights: LanguageWeights, rng: np.random.Generator) -> str:
    return sample_languages(weights, 1, rng)[0]


def cap_language_hours(corpus: Corpus, cap_s: float, seed: int = 0) -> Corpus:
    """Per language, keep a seed-shuffled prefix of utterances whose total
    duration stays within cap_s; the first utterance that would cross the
    cap ends the prefix."""
    rng = np.random.default_rng(seed)
    keep_ids = set()
    for lang in sorted(corpus.by_language):
        utts = sorted(corpus.by_language[lang], key=lambda u: u.id)
        order = rng.permutation(len(utts))
        total = 0.0
        for i in order:
            if total + utts[i].duration > cap_s:
                break
            total += utts[i].duration
            keep_ids.add(utts[i].id)
    return Corpus([u for u in corpus.utterances if u.id in keep_ids])


@dataclass
class BucketAssignment:
    buckets: list[list[str]]  # utterance ids per bucket, duration-sorted
    ratios: list[float | None]  # within-bucket max/min duration ratio

    def bucket_of(self) -> dict[str, int]:
        return {utt: b for b, members in enumerate(self.buckets) for utt in members}


def length_buckets(utterances: list[Utterance], n_buckets: int) -> BucketAssignment:
    """Duration-sort the utterances and cut them into n_buckets contiguous
    groups of near-equal size; the remainder goes to the first buckets."""
    if n_buckets < 1:
        raise ValueError("n_buckets must be >= 1")
    ordered = sorted(utterances, key=lambda u: (u.duration, u.id))
    base, rem = divmod(len(ordered), n_buckets)
    buckets, ratios = [], []
    lo = 0
    for b in range(n_buckets):
        size = base + (1 if b < rem else 0)
        chunk = ordered[lo:lo + size]
        lo += size
        buckets.append([u.id for u in chunk])
        if chunk and chunk[0].duration > 0:
            ratios.append(chunk[-1].duration / chunk[0].duration)
        else:
            ratios.append(None)
    return BucketAssignment(buckets, ratios)
