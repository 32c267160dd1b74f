"""Discrete keep-or-resample randomization over the grid {0, 1/K, ..., 1}^d.

Every coordinate is kept with probability alpha and otherwise replaced by one
of the K other grid values, each with probability beta = (1 - alpha) / K.
Points are handled as integer levels 0..K; ``to_levels`` converts grid floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputDomainError


@dataclass(frozen=True)
class NoiseParams:
    d: int
    K: int
    alpha_pct: int

    def __post_init__(self):
        for name in ("d", "K", "alpha_pct"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InputDomainError(f"{name} must be an integer, got {value!r}")
        if self.d < 1:
            raise InputDomainError(f"d must be positive, got {self.d}")
        if self.K < 1:
            raise InputDomainError(f"K must be positive, got {self.K}")
        if not 1 <= self.alpha_pct <= 99:
            raise InputDomainError(f"alpha_pct must lie in [1, 99], got {self.alpha_pct}")

    @property
    def alpha(self) -> Fraction:
        return alpha(self)

    @property
    def beta(self) -> Fraction:
        return beta(self)


def alpha(params: NoiseParams) -> Fraction:
    """Probability of keeping a coordinate."""
    return Fraction(params.alpha_pct, 100)


def beta(params: NoiseParams) -> Fraction:
    """Probability of moving a coordinate to one specific other grid value."""
    return Fraction(100 - params.alpha_pct, 100 * params.K)


def to_levels(x, K: int) -> np.ndarray:
    """Map grid values in {0, 1/K, ..., 1} (or integer levels) to levels 0..K."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise InputDomainError("a point must be a one-dimensional vector")
    if np.issubdtype(arr.dtype, np.integer):
        levels = arr.astype(np.int64)
    else:
        scaled = arr.astype(float) * K
        levels = np.rint(scaled).astype(np.int64)
        if not np.allclose(scaled, levels, rtol=0.0, atol=1e-9):
            raise InputDomainError("point has coordinates off the grid")
    if levels.size and (levels.min() < 0 or levels.max() > K):
        raise InputDomainError(f"grid levels must lie in 0..{K}")
    return levels


def sample(params: NoiseParams, x, rng_seed: int, n: int | None = None) -> np.ndarray:
    """Draw randomized copies of ``x`` (integer levels).

    Returns a single point of shape (d,) when ``n`` is None, else (n, d).
    """
    levels = to_levels(x, params.K)
    if levels.shape[0] != params.d:
        raise InputDomainError(f"expected dimension {params.d}, got {levels.shape[0]}")
    rng = np.random.default_rng(rng_seed)
    shape = (params.d,) if n is None else (n, params.d)
    keep = rng.random(shape) < params.alpha_pct / 100
    # A uniform shift in 1..K modulo K+1 hits each other level equally often.
    shift = rng.integers(1, params.K + 1, size=shape)
    moved = (levels + shift) % (params.K + 1)
    return np.where(keep, levels, moved)


def flip_count(x, z) -> int:
    """Number of coordinates where ``x`` and ``z`` differ.

    The likelihood of z under the randomization of x is
    alpha**(d - u) * beta**u with u the returned count.
    """
    a = np.asarray(x)
    b = np.asarray(z)
    if a.shape != b.shape:
        raise InputDomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def likelihood(params: NoiseParams, x, z) -> Fraction:
    u = flip_count(x, z)
    if len(np.asarray(x)) != params.d:
        raise InputDomainError(f"expected dimension {params.d}")
    return alpha(params) ** (params.d - u) * beta(params) ** u
