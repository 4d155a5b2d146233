"""Zero-resource phonetics toolkit.

Operates on precomputed frame-level speech representations and phone
alignments: articulatory feature tables, ABX discriminability, frame
pseudo-labels, phonetic inventory discovery, recognition metrics and
multilingual sampling.
"""

__version__ = "0.1.0"

from . import abx, corpus, inventory, labeler, matrixio, metrics, phoneset, sampler
from .errors import ToolkitError

__all__ = [
    "ToolkitError",
    "__version__",
    "abx",
    "corpus",
    "inventory",
    "labeler",
    "matrixio",
    "metrics",
    "phoneset",
    "sampler",
]
