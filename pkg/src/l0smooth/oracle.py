"""Brute-force references for tests and diagnostics.

Everything here enumerates outcomes one by one with its own arithmetic and
shares no code with the routines it is used to check. Size caps fail loudly.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np

from .errors import UnsupportedSizeError
from .noise import NoiseParams
from .regions import RegionEntry, RegionTable
from .tree import Tree

MAX_OUTCOMES = 10**6


def _grid_outcomes(params: NoiseParams):
    total = (params.K + 1) ** params.d
    if total > MAX_OUTCOMES:
        raise UnsupportedSizeError(
            f"(K+1)^d = {total} outcomes exceeds the oracle cap of {MAX_OUTCOMES}"
        )
    return itertools.product(range(params.K + 1), repeat=params.d)


def _canonical_far(params: NoiseParams, r: int) -> tuple[int, ...]:
    return (params.K,) * r + (0,) * (params.d - r)


def brute_regions(params: NoiseParams, r: int) -> RegionTable:
    """Classify every grid outcome by its distances to the canonical pair."""
    far = _canonical_far(params, r)
    counts: Counter = Counter()
    for z in _grid_outcomes(params):
        u = sum(1 for zi in z if zi != 0)
        v = sum(1 for zi, fi in zip(z, far) if zi != fi)
        counts[u, v] += 1
    a = Fraction(params.alpha_pct, 100)
    b = (1 - a) / params.K
    entries = [RegionEntry(u, v, c) for (u, v), c in counts.items()]
    entries.sort(key=lambda e: (-(a / b) ** (e.v - e.u), e.u))
    return RegionTable(params, r, tuple(entries))


def _point_prob(z, center, a: Fraction, b: Fraction) -> Fraction:
    prob = Fraction(1)
    for zi, ci in zip(z, center):
        prob *= a if zi == ci else b
    return prob


def brute_rho(params: NoiseParams, r: int, p) -> Fraction:
    """Tight point-wise certificate by filling single outcomes in ratio order."""
    p = Fraction(p)
    a = Fraction(params.alpha_pct, 100)
    b = (1 - a) / params.K
    near = (0,) * params.d
    far = _canonical_far(params, r)
    points = []
    for z in _grid_outcomes(params):
        px = _point_prob(z, near, a, b)
        pf = _point_prob(z, far, a, b)
        points.append((px / pf, px, pf))
    points.sort(key=lambda t: t[0], reverse=True)
    got_x = Fraction(0)
    got_far = Fraction(0)
    for _, px, pf in points:
        if got_x + px >= p:
            return got_far + (p - got_x) * pf / px
        got_x += px
        got_far += pf
    return got_far


def _leaf_paths(tree: Tree):
    """(leaf value, [(feature, goes_right), ...]) for every root-to-leaf path."""
    out = []
    stack = [(tree.root, [])]
    while stack:
        i, path = stack.pop()
        node = tree.nodes[i]
        if node.is_leaf:
            out.append((node.value, path))
        else:
            stack.append((node.left, path + [(node.feature, False)]))
            stack.append((node.right, path + [(node.feature, True)]))
    return out


def path_prob(tree: Tree, x) -> Fraction:
    """Smoothed output as a sum over leaves of value times path probability."""
    a = Fraction(tree.params.alpha_pct, 100)
    b = 1 - a
    total = Fraction(0)
    for value, path in _leaf_paths(tree):
        prob = Fraction(1)
        for feature, goes_right in path:
            prob *= a if bool(x[feature]) == goes_right else b
        total += value * prob
    return total


def _tree_output(tree: Tree, z) -> Fraction:
    i = tree.root
    while not tree.nodes[i].is_leaf:
        node = tree.nodes[i]
        i = node.right if z[node.feature] == 1 else node.left
    return tree.nodes[i].value


def exhaustive_tree_prob(tree: Tree, x, max_features: int = 20) -> Fraction:
    """Expectation of the tree output over every randomization of the used bits."""
    used = tree.used_features()
    if len(used) > max_features:
        raise UnsupportedSizeError(f"{len(used)} used features exceeds cap {max_features}")
    a = Fraction(tree.params.alpha_pct, 100)
    b = 1 - a
    x = list(int(v) for v in x)
    total = Fraction(0)
    for flips in itertools.product((0, 1), repeat=len(used)):
        z = list(x)
        prob = Fraction(1)
        for f, flip in zip(used, flips):
            if flip:
                z[f] = 1 - z[f]
                prob *= b
            else:
                prob *= a
        total += prob * _tree_output(tree, z)
    return total


def brute_tree_adversary(tree: Tree, x, r: int, maximize: bool = False) -> Fraction:
    """Extreme smoothed output over all flips of at most r used features."""
    used = tree.used_features()
    patterns = sum(math.comb(len(used), k) for k in range(min(r, len(used)) + 1))
    if patterns > MAX_OUTCOMES:
        raise UnsupportedSizeError(f"{patterns} flip patterns exceeds cap {MAX_OUTCOMES}")
    x = np.asarray(x).astype(int)
    best = None
    for k in range(min(r, len(used)) + 1):
        for subset in itertools.combinations(used, k):
            z = x.copy()
            z[list(subset)] = 1 - z[list(subset)]
            value = path_prob(tree, z)
            if best is None or (value > best if maximize else value < best):
                best = value
    return best
