"""Seed splitting: one 64-bit seed per cell, expanded into named substreams."""
import zlib

import numpy as np


def _tag_word(tag):
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFFFFFFFFFF
    return zlib.crc32(str(tag).encode("utf-8"))


def substream(seed, *tags):
    """Return a ``Generator`` keyed by ``(seed, *tags)``.

    The same key always yields the same stream regardless of call order or
    process, which keeps parallel grid cells reproducible.
    """
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_word(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(words))


def child_seed(seed, *tags):
    """Derive a plain 63-bit integer seed, e.g. for per-tree streams."""
    return int(substream(seed, *tags).integers(0, 2**63 - 1))
