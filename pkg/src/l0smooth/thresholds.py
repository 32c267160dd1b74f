"""Certification thresholds computed in scaled integer arithmetic.

For radius r the threshold is the probability p at x at which the tight
point-wise certificate equals 1/2; a prediction is certified at radius r iff
its probability exceeds the threshold. Every probability is scaled by
(100K)**d so that alpha and beta become the integers K*alpha_pct and
100 - alpha_pct, and the greedy region fill runs without any rounding until
the final decimal rounding, which always goes up.
"""

from __future__ import annotations

import concurrent.futures
import re
import time
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Callable, Literal

from . import __version__
from .errors import HeaderMismatchError, InputDomainError, TableFormatError
from .noise import NoiseParams
from .regions import build_region_table

DEFAULT_PRECISION = 20

Residual = Literal["exact", "unit"]


class _PowerCache:
    def __init__(self, base: int):
        self.base = base
        self._cache: dict[int, int] = {0: 1}

    def __getitem__(self, k: int) -> int:
        v = self._cache.get(k)
        if v is None:
            v = self._cache[k] = self.base**k
        return v


def _fill(
    params: NoiseParams,
    r: int,
    residual: Residual = "exact",
    trace: list | None = None,
) -> tuple[int, int]:
    """Scaled threshold as a fraction ``num / den`` in units of (100K)**-d.

    ``residual="unit"`` rounds the last, partially used region up to whole
    outcomes (den == 1); ``"exact"`` keeps the partial fill as a fraction.
    """
    d, K = params.d, params.K
    a_pow = _PowerCache(K * params.alpha_pct)
    b_pow = _PowerCache(100 - params.alpha_pct)
    half = 50 * K * (100 * K) ** (d - 1)
    p_acc = 0
    rho_acc = 0
    for e in build_region_table(params, r):
        p_unit = a_pow[d - e.u] * b_pow[e.u]
        rho_unit = a_pow[d - e.v] * b_pow[e.v]
        gain = rho_unit * e.count
        if rho_acc + gain < half:
            rho_acc += gain
            p_acc += p_unit * e.count
            if trace is not None:
                trace.append((rho_acc, p_acc))
            continue
        gap = half - rho_acc
        if residual == "unit":
            # smallest number of whole outcomes that closes the gap
            q = -(-gap // rho_unit)
            return p_acc + p_unit * q, 1
        if residual == "exact":
            return p_acc * rho_unit + p_unit * gap, rho_unit
        raise InputDomainError(f"unknown residual mode {residual!r}")
    raise AssertionError("scaled x_bar-masses sum past one half")


def _to_decimal(num: int, den: int, scale: int, precision_c: int) -> str:
    """Smallest c-digit decimal at or above num / (den * scale)."""
    hat = -(-(num * 10**precision_c) // (den * scale))
    whole, frac = divmod(hat, 10**precision_c)
    return f"{whole}.{frac:0{precision_c}d}"


def threshold_bigint(
    params: NoiseParams,
    r: int,
    precision_c: int = DEFAULT_PRECISION,
    residual: Residual = "exact",
) -> str:
    """Decimal upper bound of the radius-r certification threshold."""
    if not 0 <= r <= params.d:
        raise InputDomainError(f"radius must lie in [0, {params.d}], got {r}")
    if precision_c < 1:
        raise InputDomainError(f"precision must be positive, got {precision_c}")
    if r == 0:
        return "0." + "5".ljust(precision_c, "0")
    num, den = _fill(params, r, residual)
    return _to_decimal(num, den, (100 * params.K) ** params.d, precision_c)


@dataclass
class CertTable:
    params: NoiseParams
    precision_c: int
    rows: dict[int, str]
    residual: str = "exact"
    version: str = __version__
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def r_max(self) -> int:
        return max(self.rows)

    def threshold(self, r: int) -> Fraction:
        return Fraction(Decimal(self.rows[r]))

    def values_exact(self) -> dict[int, Fraction]:
        return {r: self.threshold(r) for r in self.rows}

    def validate(self) -> None:
        _validate_rows(self.rows, self.precision_c)


def _validate_rows(rows: dict[int, str], precision_c: int) -> None:
    pattern = re.compile(r"[01]\.\d{%d}" % precision_c)
    if sorted(rows) != list(range(len(rows))):
        raise TableFormatError("rows must cover r = 0, 1, ... without gaps")
    prev = None
    for r in sorted(rows):
        text = rows[r]
        if not pattern.fullmatch(text):
            raise TableFormatError(f"row {r}: {text!r} is not a {precision_c}-digit decimal")
        value = Decimal(text)
        if value > 1:
            raise TableFormatError(f"row {r}: threshold {text} exceeds 1")
        if r == 0 and value != Decimal("0.5"):
            raise TableFormatError(f"row 0 must be 0.5, got {text}")
        if prev is not None and value < prev:
            raise TableFormatError(f"row {r}: thresholds must be non-decreasing in r")
        prev = value


def _row_job(args):
    params, r, precision_c, residual = args
    start = time.perf_counter()
    value = threshold_bigint(params, r, precision_c, residual)
    return r, value, time.perf_counter() - start


def build_cert_table(
    params: NoiseParams,
    r_max: int,
    precision_c: int = DEFAULT_PRECISION,
    workers: int = 1,
    residual: Residual = "exact",
    progress: Callable[[int, str, float], None] | None = None,
) -> CertTable:
    """Thresholds for r = 0..r_max; content does not depend on ``workers``."""
    if not 0 <= r_max <= params.d:
        raise InputDomainError(f"r_max must lie in [0, {params.d}], got {r_max}")
    if workers < 1:
        raise InputDomainError("workers must be at least 1")
    jobs = [(params, r, precision_c, residual) for r in range(r_max + 1)]
    started = time.time()
    rows: dict[int, str] = {}
    seconds: dict[int, float] = {}
    if workers == 1:
        results = map(_row_job, jobs)
        pool = None
    else:
        pool = concurrent.futures.ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_row_job, jobs)
    try:
        for r, value, secs in results:
            rows[r] = value
            seconds[r] = secs
            if progress is not None:
                progress(r, value, secs)
    finally:
        if pool is not None:
            pool.shutdown()
    table = CertTable(
        params,
        precision_c,
        rows,
        residual=residual,
        meta={"started": started, "finished": time.time(), "row_seconds": seconds},
    )
    table.validate()
    return table


def format_table(table: CertTable) -> str:
    p = table.params
    lines = [
        f"# d={p.d} K={p.K} alpha_pct={p.alpha_pct} c={table.precision_c} version={table.version}",
        f"# residual={table.residual} crossing=inclusive",
    ]
    lines += [f"{r}\t{table.rows[r]}" for r in sorted(table.rows)]
    return "\n".join(lines) + "\n"


def save_table(table: CertTable, path) -> None:
    Path(path).write_text(format_table(table), encoding="utf-8")


_HEADER_KEYS = ("d", "K", "alpha_pct", "c", "version")


def parse_table(text: str, expected: NoiseParams | None = None) -> CertTable:
    header: dict[str, str] = {}
    rows: dict[int, str] = {}
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
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].isdigit():
            raise TableFormatError(f"line {lineno}: expected 'r<TAB>value', got {line!r}")
        r = int(parts[0])
        if r in rows:
            raise TableFormatError(f"line {lineno}: duplicate row for r={r}")
        rows[r] = parts[1].strip()
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise TableFormatError(f"header lacks {', '.join(missing)}")
    if not rows:
        raise TableFormatError("table has no rows")
    try:
        params = NoiseParams(int(header["d"]), int(header["K"]), int(header["alpha_pct"]))
        precision_c = int(header["c"])
    except ValueError as exc:
        raise TableFormatError(f"bad header value: {exc}") from exc
    if expected is not None and expected != params:
        raise HeaderMismatchError(f"table was built for {params}, expected {expected}")
    if max(rows) > params.d:
        raise TableFormatError(f"row r={max(rows)} exceeds d={params.d}")
    _validate_rows(rows, precision_c)
    return CertTable(
        params,
        precision_c,
        rows,
        residual=header.get("residual", "exact"),
        version=header["version"],
    )


def load_table(path, expected: NoiseParams | None = None) -> CertTable:
    return parse_table(Path(path).read_text(encoding="utf-8"), expected)
