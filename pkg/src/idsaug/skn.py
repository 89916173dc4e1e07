"""Rare-class oversampling by interpolation toward same-class neighbors.

New rows are x_i + lam * (x_j - x_i) with x_j one of x_i's k nearest
neighbors inside the class and lam uniform on [0, 1]. Sources are visited
round-robin; per synthesized row the generator draws one ``integers(k)``
neighbor position followed by one ``random()`` lam, in that order. That
draw protocol is part of the contract so an independent implementation
sharing the seed reproduces the output bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .seeding import as_generator


@dataclass
class SknConfig:
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be at least 1")


def knn(points, query_index: int, k: int) -> np.ndarray:
    """Indices of the k nearest Euclidean neighbors of one point.

    The point is never its own neighbor; ties break toward the lower row
    index. k larger than rows-1 is clamped with a warning.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n < 2:
        raise DataError("nearest-neighbor search needs at least 2 points")
    if not 0 <= query_index < n:
        raise ConfigError(f"query index {query_index} out of range")
    if k < 1:
        raise ConfigError("k must be at least 1")
    if k > n - 1:
        warnings.warn(f"k={k} exceeds available neighbors; clamping to {n - 1}")
        k = n - 1
    diff = points - points[query_index]
    dist = np.sqrt((diff * diff).sum(axis=1))
    order = np.argsort(dist, kind="stable")
    order = order[order != query_index]
    return order[:k]


def build_neighbor_lists(points, k: int) -> list[np.ndarray]:
    return [knn(points, i, k) for i in range(np.asarray(points).shape[0])]


def skn_synthesize(class_points, n_new: int, config: SknConfig,
                   rng=None) -> np.ndarray:
    """Exactly ``n_new`` interpolated rows for one class.

    A single-point class falls back to jittered duplication (uniform noise
    within 1e-3 per feature, clipped to [0, 1]) with a loud warning, since
    interpolation needs a neighbor.
    """
    points = np.asarray(class_points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise DataError("class_points must be a non-empty 2-d array")
    if n_new < 0:
        raise ConfigError("n_new must be non-negative")
    rng = as_generator(config.seed if rng is None else rng)
    n, dim = points.shape
    if n_new == 0:
        return np.empty((0, dim))

    if n == 1:
        warnings.warn(
            "SKN fallback: class has a single sample; duplicating it with "
            "per-feature jitter of at most 1e-3",
            stacklevel=2,
        )
        jitter = rng.uniform(-1e-3, 1e-3, size=(n_new, dim))
        return np.clip(points[0] + jitter, 0.0, 1.0)

    k_eff = min(config.k, n - 1)
    if k_eff < config.k:
        warnings.warn(f"k={config.k} exceeds class size - 1; using k={k_eff}")
    neighbors = build_neighbor_lists(points, k_eff)
    out = np.empty((n_new, dim))
    for t in range(n_new):
        i = t % n
        j = neighbors[i][rng.integers(k_eff)]
        lam = rng.random()
        out[t] = points[i] + lam * (points[j] - points[i])
    return out
