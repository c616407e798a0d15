"""Deterministic named random streams derived from a single 64-bit seed.

Every stochastic component (Bob strategies, fuzzers, samplers) draws from its
own named stream so that adding a consumer never perturbs the draws seen by
another.  Streams are split by hashing ``seed || name``.
"""

from __future__ import annotations

import hashlib
import random

import numpy as np


def _stream_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{seed:#x}|{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class RngHub:
    """Splitter handing out independent deterministic streams by name."""

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    def stream(self, name: str) -> random.Random:
        return random.Random(_stream_seed(self.seed, name))

    def np_stream(self, name: str) -> np.random.Generator:
        return np.random.default_rng(_stream_seed(self.seed, name))
