"""Deterministic random streams.

One master seed fans out into independent named substreams so that enabling
or reordering one subsystem (engine, operator, training, ...) never perturbs
the draws of another.
"""
from __future__ import annotations

import hashlib

import numpy as np


def stream_seed(master_seed: int, name: str) -> int:
    """Derive a stable 64-bit child seed from (master seed, stream name)."""
    digest = hashlib.sha256(f"{master_seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def stream(master_seed: int, name: str) -> np.random.Generator:
    """A PCG64 generator for the named substream."""
    return np.random.default_rng(stream_seed(master_seed, name))
