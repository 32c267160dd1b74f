"""Decision trees over binary inputs smoothed by the keep-or-flip randomization.

Each feature appears at most once in the whole tree, and a node sends its
input right when the tested bit is 1. Under the randomization every node is
reached with a probability that factors along the path, which gives an exact
recursion for the smoothed output and an exact dynamic program for the
worst case over at most r flipped input bits.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InputDomainError, TableFormatError
from .noise import NoiseParams, alpha, beta

LEAF = -1
TREE_FORMAT_VERSION = "1"


@dataclass
class Node:
    feature: int = LEAF
    left: int = LEAF
    right: int = LEAF
    value: Fraction | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature == LEAF


@dataclass
class Tree:
    params: NoiseParams
    max_depth: int
    nodes: list[Node] = field(default_factory=list)

    root = 0

    def used_features(self) -> list[int]:
        return sorted(n.feature for n in self.nodes if not n.is_leaf)

    def depth(self) -> int:
        best = 0
        stack = [(self.root, 0)]
        while stack:
            i, dep = stack.pop()
            node = self.nodes[i]
            if node.is_leaf:
                best = max(best, dep)
            else:
                stack += [(node.left, dep + 1), (node.right, dep + 1)]
        return best

    def validate(self) -> None:
        """Check structure: a rooted binary tree, every feature used at most once."""
        if self.params.K != 1:
            raise TableFormatError("smoothed trees need binary inputs (K = 1)")
        n = len(self.nodes)
        if n == 0:
            raise TableFormatError("tree has no nodes")
        parents = [0] * n
        seen_features: set[int] = set()
        for i, node in enumerate(self.nodes):
            if node.is_leaf:
                if node.value is None or not 0 <= node.value <= 1:
                    raise TableFormatError(f"leaf {i} needs a value in [0, 1]")
                continue
            if not 0 <= node.feature < self.params.d:
                raise TableFormatError(f"node {i}: feature {node.feature} outside 0..{self.params.d - 1}")
            if node.feature in seen_features:
                raise TableFormatError(f"feature {node.feature} is used by more than one node")
            seen_features.add(node.feature)
            for child in (node.left, node.right):
                if not 0 < child < n:
                    raise TableFormatError(f"node {i}: child {child} out of range")
                parents[child] += 1
        if any(parents[i] != 1 for i in range(1, n)) or parents[0] != 0:
            raise TableFormatError("nodes do not form a single rooted tree")
        if self.depth() > self.max_depth:
            raise TableFormatError(f"tree depth exceeds max_depth={self.max_depth}")


def _check_binary(x, d: int) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.shape[0] != d:
        raise InputDomainError(f"expected a binary vector of length {d}")
    if not np.isin(arr, (0, 1)).all():
        raise InputDomainError("inputs must be binary")
    return arr.astype(np.int64)


def _weighted_split(hists, a_int: int, b_int: int, depth: int) -> Fraction:
    """Weighted Gini of one child, scaled by its total arrival weight.

    ``hists[y][k]`` counts class-y samples that agreed with the path k times
    out of ``depth``; their arrival weight is proportional to a^k b^(depth-k).
    """
    w = [0, 0]
    for y in (0, 1):
        for k, c in enumerate(hists[y]):
            if c:
                w[y] += int(c) * a_int**k * b_int ** (depth - k)
    total = w[0] + w[1]
    if total == 0:
        return Fraction(0)
    # total * (1 - (w1/total)^2 - (w0/total)^2)
    return total - Fraction(w[0] ** 2 + w[1] ** 2, total)


def train(
    X,
    y,
    params: NoiseParams,
    max_depth: int,
    soft_leaves: bool = False,
    feature_fraction: float | None = None,
    seed: int | None = None,
) -> Tree:
    """Grow a feature-once tree breadth-first, greedily minimizing weighted Gini.

    Every training sample reaches every node, weighted by the probability that
    its randomized copy is routed there. Ties between features go to the lowest
    index. Leaves hold the weighted-majority class (ties to 0), or the weighted
    class-1 fraction when ``soft_leaves`` is set. ``feature_fraction`` restricts
    each node to a seeded random subset of the still-unused features.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    if params.K != 1:
        raise InputDomainError("smoothed trees need binary inputs (K = 1)")
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputDomainError("training data must be a non-empty 2-D array")
    if X.shape[1] != params.d:
        raise InputDomainError(f"expected {params.d} features, got {X.shape[1]}")
    if y.shape != (X.shape[0],):
        raise InputDomainError("labels must be a vector matching the rows of X")
    if not np.isin(X, (0, 1)).all() or not np.isin(y, (0, 1)).all():
        raise InputDomainError("features and labels must be binary")
    if max_depth < 0:
        raise InputDomainError("max_depth must be non-negative")
    X = X.astype(np.int64)
    y = y.astype(np.int64)
    rng = np.random.default_rng(seed)
    a_int, b_int = params.alpha_pct, 100 - params.alpha_pct
    unused = set(range(params.d))
    tree = Tree(params, max_depth, [Node()])
    single_class = len(np.unique(y)) == 1
    # agree[s] = number of nodes on the path where sample s kept its own bit
    queue = deque([(0, 0, np.zeros(len(y), dtype=np.int64))])
    while queue:
        i, dep, agree = queue.popleft()
        if dep == max_depth or not unused or single_class:
            tree.nodes[i].value = _leaf_value(agree, y, dep, a_int, b_int, soft_leaves)
            continue
        candidates = sorted(unused)
        if feature_fraction is not None:
            size = max(1, round(feature_fraction * len(candidates)))
            candidates = sorted(rng.choice(candidates, size=size, replace=False).tolist())
        best = None
        for f in candidates:
            right_agree = agree + (X[:, f] == 1)
            left_agree = agree + (X[:, f] == 0)
            score = sum(
                _weighted_split(_hist(ag, y, dep + 1), a_int, b_int, dep + 1)
                for ag in (left_agree, right_agree)
            )
            if best is None or score < best[0]:
                best = (score, f, left_agree, right_agree)
        _, f, left_agree, right_agree = best
        unused.discard(f)
        left_id, right_id = len(tree.nodes), len(tree.nodes) + 1
        tree.nodes += [Node(), Node()]
        tree.nodes[i] = Node(f, left_id, right_id)
        queue.append((left_id, dep + 1, left_agree))
        queue.append((right_id, dep + 1, right_agree))
    return tree


def _hist(agree: np.ndarray, y: np.ndarray, depth: int):
    return [np.bincount(agree[y == c], minlength=depth + 1) for c in (0, 1)]


def _leaf_value(agree, y, depth, a_int, b_int, soft) -> Fraction:
    hists = _hist(agree, y, depth)
    w = [
        sum(int(c) * a_int**k * b_int ** (depth - k) for k, c in enumerate(hists[cls]))
        for cls in (0, 1)
    ]
    if soft:
        return Fraction(w[1], w[0] + w[1])
    return Fraction(1) if w[1] > w[0] else Fraction(0)


def _branch_weights(params: NoiseParams, bit: int) -> tuple[Fraction, Fraction]:
    """(right, left) routing probabilities for a node whose tested input bit is ``bit``."""
    a, b = alpha(params), beta(params)
    return (a, b) if bit == 1 else (b, a)


def predict_prob(tree: Tree, x) -> Fraction:
    """Exact probability that the smoothed tree outputs 1 at ``x``."""
    x = _check_binary(x, tree.params.d)
    pred: dict[int, Fraction] = {}
    for i in _postorder(tree):
        node = tree.nodes[i]
        if node.is_leaf:
            pred[i] = node.value
        else:
            rw, lw = _branch_weights(tree.params, x[node.feature])
            pred[i] = rw * pred[node.right] + lw * pred[node.left]
    return pred[tree.root]


def _postorder(tree: Tree) -> list[int]:
    order = []
    stack = [tree.root]
    while stack:
        i = stack.pop()
        order.append(i)
        node = tree.nodes[i]
        if not node.is_leaf:
            stack += [node.left, node.right]
    return order[::-1]


@dataclass
class AdvTable:
    """``adv[i][r]``: worst smoothed output at node i with at most r flipped bits."""

    adv: dict[int, list[Fraction]]
    maximize: bool = False

    @property
    def root(self) -> list[Fraction]:
        return self.adv[Tree.root]


def dp_adversary(tree: Tree, x, r_max: int, maximize: bool = False) -> AdvTable:
    """Exact minimum (or maximum) of the smoothed output over flips of <= r bits.

    Maximizing is done by minimizing with complemented leaves.
    """
    x = _check_binary(x, tree.params.d)
    if r_max < 0:
        raise InputDomainError("r_max must be non-negative")
    adv: dict[int, list[Fraction]] = {}
    for i in _postorder(tree):
        node = tree.nodes[i]
        if node.is_leaf:
            value = 1 - node.value if maximize else node.value
            adv[i] = [value] * (r_max + 1)
            continue
        rw, lw = _branch_weights(tree.params, x[node.feature])
        right, left = adv[node.right], adv[node.left]
        row = []
        for r in range(r_max + 1):
            # the tested bit is kept: split the budget between the subtrees
            best = min(rw * right[s] + lw * left[r - s] for s in range(r + 1))
            if r >= 1:
                # the tested bit is flipped, which swaps the routing weights
                best = min(best, min(lw * right[s] + rw * left[r - 1 - s] for s in range(r)))
            row.append(best)
        adv[i] = row
    if maximize:
        adv = {i: [1 - v for v in row] for i, row in adv.items()}
    return AdvTable(adv, maximize)


def robust_label_prob(tree: Tree, x, label: int, r_max: int) -> list[Fraction]:
    """Worst-case probability of ``label`` for every budget 0..r_max."""
    if label == 1:
        return dp_adversary(tree, x, r_max).root
    return [1 - v for v in dp_adversary(tree, x, r_max, maximize=True).root]


def format_tree(tree: Tree) -> str:
    p = tree.params
    lines = [
        f"# d={p.d} K={p.K} alpha_pct={p.alpha_pct} max_depth={tree.max_depth} "
        f"version={TREE_FORMAT_VERSION}"
    ]
    for i, n in enumerate(tree.nodes):
        value = "-" if n.value is None else f"{n.value.numerator}/{n.value.denominator}"
        lines.append(f"{i} {n.feature} {n.left} {n.right} {value}")
    return "\n".join(lines) + "\n"


def save_tree(tree: Tree, path) -> None:
    Path(path).write_text(format_tree(tree), encoding="utf-8")


def parse_tree(text: str) -> Tree:
    header: dict[str, str] = {}
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                key, sep, value = token.partition("=")
                if not sep:
                    raise TableFormatError(f"line {lineno}: bad header token {token!r}")
                header[key] = value
            continue
        parts = line.split()
        if len(parts) != 5:
            raise TableFormatError(f"line {lineno}: expected 'id idx left right leaf_value'")
        try:
            ident, feature, left, right = (int(t) for t in parts[:4])
            value = None if parts[4] == "-" else Fraction(parts[4])
        except ValueError as exc:
            raise TableFormatError(f"line {lineno}: {exc}") from exc
        if ident != len(records):
            raise TableFormatError(f"line {lineno}: node ids must be consecutive from 0")
        records.append(Node(feature, left, right, value))
    for key in ("d", "K", "alpha_pct", "max_depth", "version"):
        if key not in header:
            raise TableFormatError(f"tree header lacks {key}")
    if header["version"] != TREE_FORMAT_VERSION:
        raise TableFormatError(
            f"tree format version {header['version']} is not supported (expected {TREE_FORMAT_VERSION})"
        )
    try:
        params = NoiseParams(int(header["d"]), int(header["K"]), int(header["alpha_pct"]))
        max_depth = int(header["max_depth"])
    except ValueError as exc:
        raise TableFormatError(f"bad header value: {exc}") from exc
    tree = Tree(params, max_depth, records)
    tree.validate()
    return tree


def load_tree(path) -> Tree:
    return parse_tree(Path(path).read_text(encoding="utf-8"))


def load_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    """CSV rows ``label,f0,f1,...``; a non-numeric first row is taken as a header."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            rows.append([int(c) for c in cells])
        except ValueError:
            if not rows and lineno == 1:
                continue
            raise InputDomainError(f"line {lineno}: non-integer cell") from None
    if not rows:
        raise InputDomainError("dataset is empty")
    width = {len(r) for r in rows}
    if len(width) != 1 or width.pop() < 2:
        raise InputDomainError("every row needs a label and the same number of features")
    data = np.array(rows, dtype=np.int64)
    if not np.isin(data, (0, 1)).all():
        raise InputDomainError("labels and features must be 0 or 1")
    return data[:, 1:], data[:, 0]


def save_dataset(X, y, path) -> None:
    lines = [",".join(str(int(v)) for v in [label, *row]) for row, label in zip(X, y)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

