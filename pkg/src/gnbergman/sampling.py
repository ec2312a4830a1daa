"""Seeded sampling of polydisc points away from the critical set."""

from __future__ import annotations

import numpy as np

__all__ = ["sample_polydisc_point", "sample_pairs", "sample_points", "min_separation"]


def min_separation(lam: np.ndarray) -> float:
    lam = np.asarray(lam, dtype=complex)
    if lam.size < 2:
        return np.inf
    diffs = np.abs(lam[:, None] - lam[None, :])
    return float(diffs[np.triu_indices(lam.size, 1)].min())


def sample_polydisc_point(
    rng: np.random.Generator, n: int, radius: float = 0.8, separation: float = 0.05,
    max_tries: int = 100_000,
) -> np.ndarray:
    """Uniform point of the radius-``radius`` polydisc with pairwise separation.

    Rejection sampling; each coordinate draws (u, theta) from ``rng`` in that order.
    """
    for _ in range(max_tries):
        u = rng.random(n)
        theta = rng.random(n)
        lam = radius * np.sqrt(u) * np.exp(2j * np.pi * theta)
        if min_separation(lam) >= separation:
            return lam
    raise RuntimeError(f"could not sample {n} points with separation {separation} in radius {radius}")


def sample_points(seed: int, n: int, count: int, radius: float = 0.8, separation: float = 0.05) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.array([sample_polydisc_point(rng, n, radius, separation) for _ in range(count)])


def sample_pairs(
    seed: int, n: int, count: int, radius: float = 0.8, separation: float = 0.05
) -> tuple[np.ndarray, np.ndarray]:
    """``count`` pairs (lam, mu), drawn alternately from one stream."""
    rng = np.random.default_rng(seed)
    lams, mus = [], []
    for _ in range(count):
        lams.append(sample_polydisc_point(rng, n, radius, separation))
        mus.append(sample_polydisc_point(rng, n, radius, separation))
    return np.array(lams), np.array(mus)
