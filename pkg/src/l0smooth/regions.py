"""Likelihood-ratio regions for the canonical pair at l0 distance r.

For radius r the canonical pair is x = (0, ..., 0) and x_bar with its first r
coordinates at the top grid level. Every outcome z falls in exactly one region
L(u, v; r): it differs from x in u coordinates and from x_bar in v coordinates,
so its likelihood under the two randomizations is alpha**(d-u) beta**u and
alpha**(d-v) beta**v. Region sizes come from a closed-form count evaluated in
exact integers.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Literal

from .errors import InputDomainError
from .noise import NoiseParams, alpha, beta


@dataclass(frozen=True)
class RegionEntry:
    u: int
    v: int
    count: int

    def ratio(self, params: NoiseParams) -> Fraction:
        """Likelihood ratio Pr(x -> z) / Pr(x_bar -> z), constant over the region."""
        return (alpha(params) / beta(params)) ** (self.v - self.u)


@dataclass(frozen=True)
class RegionTable:
    params: NoiseParams
    r: int
    entries: tuple[RegionEntry, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(e.u, e.v): e.count for e in self.entries}


def _check_radius(params: NoiseParams, r: int) -> None:
    if not 0 <= r <= params.d:
        raise InputDomainError(f"radius must lie in [0, {params.d}], got {r}")


class _Counter:
    """Region-size evaluator with per-(params, r) caches.

    ``rest[i]`` = C(d-r, i) K^i counts the ways to move i of the d-r shared
    coordinates; ``pow_km1[j]`` counts the off-pair values for j coordinates
    that both points move and that started out different.
    """

    def __init__(self, params: NoiseParams, r: int):
        d, K = params.d, params.K
        self.d, self.r = d, r
        n = d - r
        rest = [1] * (n + 1)
        for i in range(n):
            rest[i + 1] = rest[i] * (n - i) // (i + 1) * K
        self.rest = rest
        pow_km1 = [1] * (r + 1)
        for j in range(r):
            pow_km1[j + 1] = pow_km1[j] * (K - 1)
        self.pow_km1 = pow_km1
        self.comb_r = [comb(r, j) for j in range(r + 1)]

    def __call__(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        r = self.r
        lo = max(0, v - r)
        hi = min(u, self.d - r, (u + v - r) // 2)
        total = 0
        for i in range(lo, hi + 1):
            j = u + v - 2 * i - r
            only_x = i + r - v  # moved away from x only: z agrees with x_bar there
            total += (
                self.comb_r[j]
                * comb(r - j, only_x)
                * self.pow_km1[j]
                * self.rest[i]
            )
        return total


def cardinality(params: NoiseParams, r: int, u: int, v: int) -> int:
    """Exact size of L(u, v; r)."""
    _check_radius(params, r)
    for name, value in (("u", u), ("v", v)):
        if not 0 <= value <= params.d:
            raise InputDomainError(f"{name} must lie in [0, {params.d}], got {value}")
    return _Counter(params, r)(u, v)


def ratio_sort_key(params: NoiseParams):
    """Sort key putting larger likelihood ratios first, ties by ascending u.

    The ratio is (alpha/beta)**(v-u), so its order is decided by the sign of
    alpha - beta alone; no large powers are formed.
    """
    a, b = alpha(params), beta(params)
    if a > b:
        return lambda e: (e.u - e.v, e.u)
    if a < b:
        return lambda e: (e.v - e.u, e.u)
    return lambda e: (0, e.u)


def build_region_table(params: NoiseParams, r: int) -> RegionTable:
    """All nonempty regions for radius r, sorted by decreasing likelihood ratio."""
    _check_radius(params, r)
    count = _Counter(params, r)
    d = params.d
    entries = []
    for u in range(d + 1):
        # Triangle inequality: |u - v| <= r for any reachable outcome.
        for v in range(max(0, u - r), min(d, u + r) + 1):
            c = count(u, v)
            if c:
                entries.append(RegionEntry(u, v, c))
    entries.sort(key=ratio_sort_key(params))
    return RegionTable(params, r, tuple(entries))


def region_mass(
    entry: RegionEntry, params: NoiseParams, side: Literal["x", "xbar"] = "x"
) -> Fraction:
    """Probability that the randomized x (or x_bar) lands in the region."""
    flips = {"x": entry.u, "xbar": entry.v}.get(side)
    if flips is None:
        raise InputDomainError(f"side must be 'x' or 'xbar', got {side!r}")
    return entry.count * alpha(params) ** (params.d - flips) * beta(params) ** flips


def dump_csv(entries: Iterable[RegionEntry]) -> str:
    buf = io.StringIO()
    buf.write("u,v,count\n")
    for e in entries:
        buf.write(f"{e.u},{e.v},{e.count}\n")
    return buf.getvalue()
