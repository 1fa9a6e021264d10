"""Small shared pieces: cone classification labels and RNG helpers."""

from __future__ import annotations

import enum

import numpy as np


class Cone(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_orthogonal(rng: np.random.Generator, k: int) -> np.ndarray:
    """Haar-distributed element of O(k)."""
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)
