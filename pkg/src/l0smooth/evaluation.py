"""Probability estimation, dataset-level certified metrics and adversarial AUC."""

from __future__ import annotations

import io
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.special import betainc

from .errors import InputDomainError, UnsupportedSizeError
from .pointwise import certified_radius

DEFAULT_CONFIDENCE = 0.999
DEFAULT_SAMPLES = 100_000
EXHAUSTIVE_AUC_CAP = 20


def clopper_pearson_lower(success: int, n: int, confidence: float = DEFAULT_CONFIDENCE) -> float:
    """One-sided Clopper-Pearson lower bound on a Bernoulli success probability.

    The bound is the (1 - confidence) quantile of Beta(success, n - success + 1),
    found by bisection on the regularized incomplete beta function. The lower
    end of the final bracket (width <= 1e-12) is returned.
    """
    if n <= 0 or not 0 <= success <= n:
        raise InputDomainError(f"need 0 <= success <= n and n > 0, got {success}/{n}")
    if not 0 < confidence < 1:
        raise InputDomainError(f"confidence must lie in (0, 1), got {confidence}")
    if success == 0:
        return 0.0
    a, b = success, n - success + 1
    target = 1 - confidence
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        if betainc(a, b, mid) < target:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    label: int
    predicted: int | None = None
    success_count: int | None = None
    n_samples: int | None = None
    p_exact: Fraction | None = None
    score: Fraction | None = None

    def __post_init__(self):
        has_counts = self.success_count is not None or self.n_samples is not None
        if has_counts and self.p_exact is not None:
            raise InputDomainError(f"record {self.id}: give either counts or p_exact, not both")
        if self.p_exact is None:
            if self.success_count is None or self.n_samples is None:
                raise InputDomainError(f"record {self.id}: needs success_count and n_samples, or p_exact")
            if self.n_samples <= 0 or not 0 <= self.success_count <= self.n_samples:
                raise InputDomainError(f"record {self.id}: invalid counts")
            if self.predicted is None:
                raise InputDomainError(f"record {self.id}: count records need a predicted class")
        elif not 0 <= self.p_exact <= 1:
            raise InputDomainError(f"record {self.id}: p_exact outside [0, 1]")

    @property
    def predicted_class(self) -> int:
        # an exact record without a prediction carries the label's probability
        return self.label if self.predicted is None else self.predicted

    def p_lower(self, confidence: float = DEFAULT_CONFIDENCE) -> Fraction:
        """Sound lower bound on the probability of the predicted class."""
        if self.p_exact is not None:
            return self.p_exact
        return Fraction(clopper_pearson_lower(self.success_count, self.n_samples, confidence))


@dataclass(frozen=True)
class Certified:
    id: str
    p_lower: Fraction
    radius: int | None
    correct: bool

    @property
    def label_radius(self) -> int | None:
        """Certified radius with respect to the true label (None if wrong or abstaining)."""
        return self.radius if self.correct else None


def certify_records(records: Iterable[PredictionRecord], table, confidence=DEFAULT_CONFIDENCE):
    out = []
    for rec in records:
        p = rec.p_lower(confidence)
        out.append(Certified(rec.id, p, certified_radius(p, table), rec.predicted_class == rec.label))
    return out


def acc_at_r(records, table, r: int, confidence: float = DEFAULT_CONFIDENCE) -> float:
    """Fraction of records that are correct and certified to radius >= r."""
    certs = certify_records(records, table, confidence)
    if not certs:
        return 0.0
    hits = sum(1 for c in certs if c.label_radius is not None and c.label_radius >= r)
    return hits / len(certs)


def mean_radius(records, table, confidence: float = DEFAULT_CONFIDENCE) -> float:
    """Average certified radius w.r.t. the labels; wrong or abstaining records count 0.

    Radii are capped at the largest r covered by the table.
    """
    certs = certify_records(records, table, confidence)
    if not certs:
        return 0.0
    return sum(c.label_radius or 0 for c in certs) / len(certs)


def format_report(certs: Sequence[Certified]) -> str:
    buf = io.StringIO()
    buf.write("id,p_lower,radius,correct\n")
    for c in certs:
        radius = "abstain" if c.radius is None else str(c.radius)
        buf.write(f"{c.id},{float(c.p_lower):.10f},{radius},{int(c.correct)}\n")
    return buf.getvalue()


def _parse_fraction(text) -> Fraction:
    if not isinstance(text, str):
        raise ValueError("exact probabilities are strings like 'num/den'")
    return Fraction(text)


def _int_field(obj: dict, key: str, required: bool):
    value = obj.get(key)
    if value is None:
        if required:
            raise ValueError(f"missing {key!r}")
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{key!r} must be an integer")
    return value


def parse_record(obj: dict) -> PredictionRecord:
    if not isinstance(obj, dict):
        raise ValueError("each line must be a JSON object")
    if not isinstance(obj.get("id"), str):
        raise ValueError("'id' must be a string")
    p_exact = obj.get("p_exact")
    score = obj.get("score")
    return PredictionRecord(
        id=obj["id"],
        label=_int_field(obj, "label", True),
        predicted=_int_field(obj, "predicted", False),
        success_count=_int_field(obj, "success_count", False),
        n_samples=_int_field(obj, "n_samples", False),
        p_exact=None if p_exact is None else _parse_fraction(p_exact),
        score=None if score is None else _parse_fraction(score),
    )


def ingest_predictions(path) -> list[PredictionRecord]:
    """Read a JSON-lines prediction dump, sorted by id."""
    records = []
    seen = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = parse_record(json.loads(line))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputDomainError(f"line {lineno}: {exc}") from exc
        if rec.id in seen:
            raise InputDomainError(f"line {lineno}: duplicate id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return sorted(records, key=lambda rec: rec.id)


def record_to_json(rec: PredictionRecord) -> str:
    obj: dict = {"id": rec.id, "label": rec.label}
    if rec.predicted is not None:
        obj["predicted"] = rec.predicted
    if rec.p_exact is None:
        obj["success_count"] = rec.success_count
        obj["n_samples"] = rec.n_samples
    else:
        obj["p_exact"] = f"{rec.p_exact.numerator}/{rec.p_exact.denominator}"
    if rec.score is not None:
        obj["score"] = f"{rec.score.numerator}/{rec.score.denominator}"
    return json.dumps(obj)


def write_predictions(records: Iterable[PredictionRecord], path) -> None:
    Path(path).write_text("".join(record_to_json(r) + "\n" for r in records), encoding="utf-8")


@dataclass(frozen=True)
class AucInstance:
    """A scored test point: clean score, score after its worst perturbation, polarity."""

    clean: Fraction | float
    adv: Fraction | float
    positive: bool

    def __post_init__(self):
        if self.positive and self.adv > self.clean:
            raise InputDomainError("a perturbed positive cannot score higher than the clean one")
        if not self.positive and self.adv < self.clean:
            raise InputDomainError("a perturbed negative cannot score lower than the clean one")


def _ranks(instances: Sequence[AucInstance]):
    """Map every score to its rank among all distinct scores (exact comparisons)."""
    values = sorted({v for inst in instances for v in (inst.clean, inst.adv)})
    index = {v: i for i, v in enumerate(values)}
    clean = np.array([index[i.clean] for i in instances])
    adv = np.array([index[i.adv] for i in instances])
    return clean, adv


def _half_wins(pos: np.ndarray, neg: np.ndarray) -> np.ndarray:
    """2 * I(pos > neg) + I(pos == neg) for all pairs."""
    return 2 * (pos[:, None] > neg[None, :]) + (pos[:, None] == neg[None, :])


def _split(instances: Sequence[AucInstance]):
    if not instances:
        raise InputDomainError("no instances")
    clean, adv = _ranks(instances)
    pos = np.array([i.positive for i in instances])
    if pos.all() or not pos.any():
        raise InputDomainError("AUC needs at least one positive and one negative instance")
    return clean[pos], adv[pos], clean[~pos], adv[~pos]


def _auc_from_flags(parts, a: np.ndarray, b: np.ndarray) -> float:
    pc, pa, nc, na = parts
    pos = np.where(a, pa, pc)
    neg = np.where(b, na, nc)
    return _half_wins(pos, neg).sum() / (2 * len(pos) * len(neg))


def clean_auc(instances: Sequence[AucInstance]) -> float:
    parts = _split(instances)
    return _auc_from_flags(parts, np.zeros(len(parts[0]), bool), np.zeros(len(parts[2]), bool))


def adversarial_auc(
    instances: Sequence[AucInstance],
    k: int,
    mode: Literal["exhaustive", "greedy"] = "exhaustive",
) -> float:
    """Smallest AUC reachable by replacing at most k clean scores with perturbed ones.

    ``exhaustive`` enumerates every feasible choice (n + m <= 20) and is exact;
    ``greedy`` perturbs one instance at a time, always the largest AUC drop, and
    gives an upper bound on the exact minimum.
    """
    parts = _split(instances)
    n, m = len(parts[0]), len(parts[2])
    if not 0 <= k <= n + m:
        raise InputDomainError(f"k must lie in [0, {n + m}], got {k}")
    if mode == "exhaustive":
        if n + m > EXHAUSTIVE_AUC_CAP:
            raise UnsupportedSizeError(
                f"exhaustive AUC supports at most {EXHAUSTIVE_AUC_CAP} instances, got {n + m}; use greedy"
            )
        return _exhaustive_auc(parts, k)
    if mode == "greedy":
        return _greedy_auc(parts, k)
    raise InputDomainError(f"unknown mode {mode!r}")


def _exhaustive_auc(parts, k: int) -> float:
    pc, pa, nc, na = parts
    # m4[oflag][iflag][o, j]: half-wins between outer element o and inner element j
    if len(pc) >= len(nc):
        outer_n, inner_n = len(pc), len(nc)
        m4 = [[_half_wins(po, ne) for ne in (nc, na)] for po in (pc, pa)]
    else:
        outer_n, inner_n = len(nc), len(pc)
        m4 = [[_half_wins(po, ne).T for po in (pc, pa)] for ne in (nc, na)]
    masks = np.array(list(itertools.product((0, 1), repeat=inner_n)), dtype=np.int64)
    sizes = masks.sum(axis=1)
    best = None
    for t in range(min(k, outer_n) + 1):
        feasible = masks[sizes <= k - t]
        for chosen in itertools.combinations(range(outer_n), t):
            flags = np.zeros(outer_n, dtype=bool)
            flags[list(chosen)] = True
            col0 = np.where(flags[:, None], m4[1][0], m4[0][0]).sum(axis=0)
            col1 = np.where(flags[:, None], m4[1][1], m4[0][1]).sum(axis=0)
            totals = col0.sum() + feasible @ (col1 - col0)
            low = int(totals.min())
            if best is None or low < best:
                best = low
    return best / (2 * len(pc) * len(nc))


def _greedy_auc(parts, k: int) -> float:
    n, m = len(parts[0]), len(parts[2])
    a = np.zeros(n, bool)
    b = np.zeros(m, bool)
    current = _auc_from_flags(parts, a, b)
    for _ in range(k):
        best = None
        for flags, size in ((a, n), (b, m)):
            for i in range(size):
                if flags[i]:
                    continue
                flags[i] = True
                value = _auc_from_flags(parts, a, b)
                flags[i] = False
                if best is None or value < best[0]:
                    best = (value, flags, i)
        if best is None:
            break
        current, flags, i = best
        flags[i] = True
    return current
