"""Seeded space-filling samples used for optimizer starts and candidate sets."""

from __future__ import annotations

import numpy as np

__all__ = ["latin_hypercube", "sample_box"]


def latin_hypercube(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """n stratified samples in [0, 1]^d, one per row."""
    cells = (np.arange(n)[:, None] + rng.uniform(size=(n, d))) / n
    for j in range(d):
        cells[:, j] = cells[rng.permutation(n), j]
    return cells


def sample_box(rng: np.random.Generator, n: int, lower, upper) -> np.ndarray:
    """Latin hypercube sample of an axis-aligned box."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    return lo + latin_hypercube(rng, n, lo.shape[0]) * (hi - lo)
