"""Shared random fixtures for the tree and acceptance tests."""

from fractions import Fraction

import numpy as np

from l0smooth.noise import NoiseParams
from l0smooth.tree import Node, Tree


def random_tree(rng: np.random.Generator, d: int, max_depth: int, alpha_pct: int) -> Tree:
    """Random feature-once tree; leaves are hard or soft at random."""
    features = list(rng.permutation(d))
    nodes: list[Node] = [Node()]
    queue = [(0, 0)]
    while queue:
        i, dep = queue.pop(0)
        if dep < max_depth and features and (dep == 0 or rng.random() < 0.75):
            left, right = len(nodes), len(nodes) + 1
            nodes += [Node(), Node()]
            nodes[i] = Node(int(features.pop()), left, right)
            queue += [(left, dep + 1), (right, dep + 1)]
        elif rng.random() < 0.5:
            nodes[i] = Node(value=Fraction(int(rng.integers(0, 2))))
        else:
            nodes[i] = Node(value=Fraction(int(rng.integers(0, 9)), 8))
    tree = Tree(NoiseParams(d, 1, alpha_pct), max_depth, nodes)
    tree.validate()
    return tree


def tree_fixtures(count: int = 200, seed: int = 12345):
    """(tree, x, r) triples: depth <= 4, d <= 12, r <= 3."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.integers(2, 13))
        tree = random_tree(rng, d, int(rng.integers(1, 5)), int(rng.choice([20, 50, 70, 80, 95])))
        x = rng.integers(0, 2, d)
        out.append((tree, x, int(rng.integers(0, min(3, d) + 1))))
    return out


def synthetic_dataset(n: int, d: int, seed: int, noise: float = 0.1):
    """Binary data whose label depends on a few features plus label noise."""
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, (n, d))
    y = ((X[:, 0] & X[:, 1]) | (X[:, 2] & ~X[:, 3] & 1)).astype(np.int64)
    flip = rng.random(n) < noise
    return X, np.where(flip, 1 - y, y)


def redundant_dataset(n: int, d: int, copies: int, seed: int, noise: float = 0.1):
    """Label is a latent bit; the first ``copies`` features are noisy copies of it."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    X = rng.integers(0, 2, (n, d))
    clean = np.repeat(y[:, None], copies, axis=1)
    flip = rng.random((n, copies)) < noise
    X[:, :copies] = np.where(flip, 1 - clean, clean)
    return X, y
