"""Closed-form certificates: additive uniform noise and the Gaussian l0 baseline.

Both work in floating point. Neither feeds the exact discrete pipeline; they
exist for comparison and illustration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InputDomainError


@dataclass(frozen=True)
class UniformParams:
    gamma: float
    d: int

    def __post_init__(self):
        if not self.gamma > 0:
            raise InputDomainError(f"gamma must be positive, got {self.gamma}")
        if self.d < 1:
            raise InputDomainError(f"d must be positive, got {self.d}")


def _check_q(q) -> float:
    if q in (1, "1"):
        return 1
    if q in (math.inf, "inf", "∞"):
        return math.inf
    raise InputDomainError(f"q must be 1 or inf, got {q!r}")


def uniform_radius(params: UniformParams, p: float, q=1) -> float | None:
    """Certified l1 or l_inf radius under Uniform([-gamma, gamma])^d noise.

    Returns None (abstain) for p <= 0.5.
    """
    q = _check_q(q)
    if not 0 <= p <= 1:
        raise InputDomainError(f"p must lie in [0, 1], got {p}")
    if p <= 0.5:
        return None
    g = params.gamma
    if q == 1:
        radius = 2 * p * g - g
    else:
        radius = 2 * g - 2 * g * (1.5 - p) ** (1 / params.d)
    return max(0.0, radius)


def uniform_pointwise_numeric(params: UniformParams, p: float, offset: Sequence[float]) -> float:
    """Worst-case probability at x + offset given probability p at x.

    Only the two cubes' overlap matters: outcomes outside the shifted cube are
    filled first (infinite ratio), the overlap (ratio 1) next.
    """
    if len(offset) != params.d:
        raise InputDomainError(f"offset must have length {params.d}")
    side = 2 * params.gamma
    overlap = 1.0
    for delta in offset:
        overlap *= max(0.0, side - abs(delta)) / side
    return max(0.0, p - (1.0 - overlap))


def concentrated_offset(params: UniformParams, radius: float, q=1) -> list[float]:
    """Offset of the given norm that minimizes the cube overlap."""
    q = _check_q(q)
    if q == 1:
        return [radius] + [0.0] * (params.d - 1)
    return [radius] * params.d


def uniform_radius_numeric(params: UniformParams, p: float, q=1, tol: float = 1e-13) -> float:
    """Bisection for the largest norm whose worst offset keeps rho above 0.5."""
    q = _check_q(q)
    lo, hi = 0.0, 2 * params.gamma
    if uniform_pointwise_numeric(params, p, concentrated_offset(params, lo, q)) <= 0.5:
        return 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if uniform_pointwise_numeric(params, p, concentrated_offset(params, mid, q)) > 0.5:
            lo = mid
        else:
            hi = mid
    return lo


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2))


# Acklam's rational approximation (relative error below 1.15e-9).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1
        )
    if p > 1 - _P_LOW:
        return -_acklam(1 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1
    )


def std_normal_quantile(p: float) -> float:
    """Inverse standard normal CDF: rational approximation plus one Newton step."""
    if not 0 < p < 1:
        raise InputDomainError(f"p must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -std_normal_quantile(1 - p)
    x = _acklam(p)
    density = math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    return x - (std_normal_cdf(x) - p) / density


def gaussian_alpha(sigma: float) -> float:
    """Keep-probability of the discrete scheme equivalent to thresholding N(0, sigma^2) at 0.5."""
    if not sigma > 0:
        raise InputDomainError(f"sigma must be positive, got {sigma}")
    return std_normal_cdf(0.5 / sigma)


def sigma_for_alpha(alpha: float) -> float:
    if not 0.5 < alpha < 1:
        raise InputDomainError(f"alpha must lie in (0.5, 1), got {alpha}")
    return 0.5 / std_normal_quantile(alpha)


def gaussian_l0_radius(sigma: float, p: float) -> int | None:
    """l0 radius implied by the Gaussian l2 certificate sigma * Phi^-1(p).

    Binary inputs at l0 distance r are at l2 distance sqrt(r), so the radius is
    the largest integer r with sqrt(r) < sigma * Phi^-1(p). Squares within
    1e-9 (relative) above an integer are rounded down so floating error never
    overstates the radius. Returns None (abstain) for p < 0.5.
    """
    if not 0 < p < 1:
        raise InputDomainError(f"p must lie in (0, 1), got {p}")
    if not sigma > 0:
        raise InputDomainError(f"sigma must be positive, got {sigma}")
    if p < 0.5:
        return None
    if p == 0.5:
        return 0
    s2 = (sigma * std_normal_quantile(p)) ** 2
    return max(0, math.ceil(s2 - 1e-9 * max(1.0, s2)) - 1)
