"""Tight point-wise certificate over a finite partition into likelihood-ratio regions.

Given the probability mass every region receives under the randomization of x
and of a neighbour x_bar, the smallest probability any classifier can assign
to the class at x_bar, subject to probability p at x, is reached by filling
regions greedily in order of decreasing likelihood ratio. This module is the
exact (Fraction-only) reference path; ``thresholds`` holds the fast one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InputDomainError, NotInvertibleError
from .noise import NoiseParams
from .regions import RegionTable, region_mass

INF = math.inf


@dataclass(frozen=True)
class MassPair:
    mass_x: Fraction
    mass_xbar: Fraction

    @property
    def ratio(self):
        """mass_x / mass_xbar, ``INF`` when only x reaches the region."""
        if self.mass_xbar == 0:
            return INF if self.mass_x > 0 else None
        return Fraction(self.mass_x) / self.mass_xbar


@dataclass(frozen=True)
class Witness:
    """Per-region probability of predicting the class under an optimal classifier."""

    g: tuple[Fraction, ...]
    boundary: int  # 0-based index of the partially filled region


def mass_pairs(table: RegionTable) -> list[MassPair]:
    return [
        MassPair(region_mass(e, table.params, "x"), region_mass(e, table.params, "xbar"))
        for e in table
    ]


def _ratio_geq(a: MassPair, b: MassPair) -> bool:
    # a.mass_x / a.mass_xbar >= b.mass_x / b.mass_xbar without forming the ratios
    return a.mass_x * b.mass_xbar >= b.mass_x * a.mass_xbar


def _validate(regions: Sequence[MassPair]) -> list[MassPair]:
    live = [m for m in regions if m.mass_x != 0 or m.mass_xbar != 0]
    if not live:
        raise InputDomainError("no region carries probability mass")
    for m in live:
        if m.mass_x < 0 or m.mass_xbar < 0:
            raise InputDomainError("region masses must be non-negative")
    if sum(m.mass_x for m in live) != 1 or sum(m.mass_xbar for m in live) != 1:
        raise InputDomainError("region masses must sum to 1 under both randomizations")
    for prev, cur in zip(live, live[1:]):
        if not _ratio_geq(prev, cur):
            raise InputDomainError("regions must be sorted by decreasing likelihood ratio")
    return live


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Decimal, float)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(Decimal(value)) if "/" not in value else Fraction(value)
    raise InputDomainError(f"cannot interpret {value!r} as a probability")


def rho(regions: Sequence[MassPair], p) -> tuple[Fraction, Witness]:
    """Minimum probability at x_bar over classifiers with probability ``p`` at x.

    Returns the exact minimum together with the region-wise optimal classifier.
    Regions with no mass on either side are skipped (and get g = 0).
    """
    p = _as_fraction(p)
    if not 0 <= p <= 1:
        raise InputDomainError(f"p must lie in [0, 1], got {p}")
    _validate(regions)
    n = len(regions)
    g = [Fraction(0)] * n
    if p == 0:
        return Fraction(0), Witness(tuple(g), 0)
    filled_x = Fraction(0)
    filled_xbar = Fraction(0)
    for i, m in enumerate(regions):
        if m.mass_x == 0 and m.mass_xbar == 0:
            continue
        if filled_x + m.mass_x >= p:
            part = (p - filled_x) / m.mass_x
            g[i] = part
            return filled_xbar + part * m.mass_xbar, Witness(tuple(g), i)
        g[i] = Fraction(1)
        filled_x += m.mass_x
        filled_xbar += m.mass_xbar
    raise AssertionError("x-masses sum to 1, so the fill always reaches p")


def rho_inverse(regions: Sequence[MassPair], target) -> Fraction:
    """The unique p with rho(p) == target (exact, slow reference)."""
    target = _as_fraction(target)
    if not 0 <= target <= 1:
        raise InputDomainError(f"target must lie in [0, 1], got {target}")
    live = _validate(regions)
    if any(m.mass_x == 0 or m.mass_xbar == 0 for m in live):
        raise NotInvertibleError("every likelihood ratio must be finite and positive")
    if target == 0:
        return Fraction(0)
    filled_x = Fraction(0)
    filled_xbar = Fraction(0)
    for m in live:
        if filled_xbar + m.mass_xbar >= target:
            return filled_x + (target - filled_xbar) * m.mass_x / m.mass_xbar
        filled_x += m.mass_x
        filled_xbar += m.mass_xbar
    raise AssertionError("x_bar-masses sum to 1, so the fill always reaches target")


def threshold_map(thresholds) -> dict[int, Fraction]:
    """Normalize a CertTable or a plain ``{r: value}`` mapping to exact values."""
    if hasattr(thresholds, "values_exact"):
        return thresholds.values_exact()
    if isinstance(thresholds, Mapping):
        return {int(r): _as_fraction(v) for r, v in thresholds.items()}
    raise InputDomainError(f"unsupported threshold container {type(thresholds).__name__}")


def certified_radius(p, thresholds, params: NoiseParams | None = None) -> int | None:
    """Largest r with p above the radius-r threshold; ``None`` means abstain.

    The radius is capped at the largest r the table covers.
    """
    if params is not None and getattr(thresholds, "params", params) != params:
        raise InputDomainError("threshold table was built for different noise parameters")
    p = _as_fraction(p)
    if p <= Fraction(1, 2):
        return None
    rows = threshold_map(thresholds)
    rows.setdefault(0, Fraction(1, 2))
    radius = None
    for r in sorted(rows):
        if r != (0 if radius is None else radius + 1):
            break  # gap in the table: nothing beyond it is covered
        if p > rows[r]:
            radius = r
        else:
            break
    return radius
