"""Deterministic random streams.

A master seed plus a tuple of text labels (experiment, stage, trial index)
names one ``numpy.random.Generator`` backed by Philox.  Labels are hashed
into the ``SeedSequence`` spawn key, so a stream depends only on its name
and never on how many other streams were drawn before it.
"""

from __future__ import annotations

import hashlib

import numpy as np


def label_words(*labels: object) -> tuple[int, ...]:
    """Stable 32-bit words for a label path."""
    text = "|".join(str(label) for label in labels)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def seed_sequence(seed: int, *labels: object) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=label_words(*labels))


def rng_for(seed: int, *labels: object) -> np.random.Generator:
    """Generator for the stream named ``labels`` under master ``seed``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *labels)))


def trial_rngs(seed: int, count: int, *labels: object) -> list[np.random.Generator]:
    return [rng_for(seed, *labels, i) for i in range(count)]
