"""Sequential and parallel communication lower bounds from rank-expansion bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .sigma import SigmaFn

MODES = ("diagonal", "simplex")
LOG2_3 = math.log2(3)
LOG2_7 = math.log2(7)
LOG3_2 = math.log(2) / math.log(3)
LOG3_7 = math.log(7) / math.log(3)


class CommBoundError(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionBound:
    """``E(r_A, r_B, r_C) = min_X sigma_X^dagger(r_X)`` over the present operands."""

    sigma_a: SigmaFn | None = None
    sigma_b: SigmaFn | None = None
    sigma_c: SigmaFn | None = None

    def operands(self) -> list[tuple[str, SigmaFn]]:
        return [(lab, s) for lab, s in zip("ABC", (self.sigma_a, self.sigma_b, self.sigma_c)) if s]

    def __call__(self, ra: float, rb: float, rc: float) -> float:
        rs = {"A": ra, "B": rb, "C": rc}
        vals = [s.pseudoinverse(max(rs[lab], 0.0)) for lab, s in self.operands()]
        return min(vals) if vals else math.inf


@dataclass(frozen=True)
class ProblemShape:
    R: float
    m_a: float
    m_b: float
    m_c: float

    def __post_init__(self):
        if min(self.R, self.m_a, self.m_b, self.m_c) <= 0:
            raise CommBoundError("R and all sizes must be positive")

    def size(self, lab: str) -> float:
        return {"A": self.m_a, "B": self.m_b, "C": self.m_c}[lab]

    @property
    def io(self) -> float:
        return self.m_a + self.m_b + self.m_c


@dataclass
class CommBoundReport:
    mode: str
    value: float
    intermediates: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"mode": self.mode, "value": _j(self.value),
                "intermediates": {k: _j(v) for k, v in self.intermediates.items()}}


def _j(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, dict):
        return {k: _j(x) for k, x in v.items()}
    return v


def emax(eb: ExpansionBound, M: float, mode: str = "diagonal") -> float:
    """``max E(r)`` over ``r_A + r_B + r_C = 3M``.

    ``diagonal`` evaluates ``E(M, M, M)``.  ``simplex`` relaxes the ``r_X``
    to reals and bisects on the target ``t``: ``t`` is reachable iff
    ``sum_X sigma_X(t) <= 3M``.
    """
    if M < 1:
        raise CommBoundError(f"M must be at least 1, got {M}")
    if mode == "diagonal":
        return eb(M, M, M)
    if mode != "simplex":
        raise CommBoundError(f"unknown emax mode {mode!r}")
    ops = [s for _, s in eb.operands()]
    if not ops:
        return math.inf

    def ok(t):
        return sum(s.eval(t) for s in ops) <= 3 * M

    lo, hi = 0.0, max(1.0, float(M))
    while ok(hi):
        lo, hi = hi, hi * 2
        if hi > 1e300:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def sequential_bound(eb: ExpansionBound, shape: ProblemShape, M: float, mode: str = "diagonal") -> CommBoundReport:
    """``max(2 R M / E^max(M), m_A + m_B + m_C)``."""
    e = emax(eb, M, mode)
    term = 2 * shape.R * M / e if e > 0 else math.inf
    value = max(term, shape.io)
    return CommBoundReport("sequential", value, {"M": M, "emax_mode": mode, "emax": e,
                                                 "expansion_term": term, "io_term": shape.io})


def parallel_bound(eb: ExpansionBound, shape: ProblemShape, P: float) -> CommBoundReport:
    """``sum_X max(0, sigma_X(R/P) - m_X/P)``: the least ``r_A + r_B + r_C`` with ``R/P <= E(r + m/P)``.

    Clamped terms are flagged in ``intermediates["clamped"]``.
    """
    if P < 1:
        raise CommBoundError(f"P must be at least 1, got {P}")
    target = shape.R / P
    r: dict[str, float] = {}
    raw: dict[str, float] = {}
    for lab, s in eb.operands():
        raw[lab] = s.eval(target) - shape.size(lab) / P
        r[lab] = max(0.0, raw[lab])
    args = [r.get(lab, 0.0) + shape.size(lab) / P for lab in "ABC"]
    residual = eb(*args) - target
    clamped = sorted(lab for lab, v in raw.items() if v < 0)
    return CommBoundReport("parallel", sum(r.values()), {
        "P": P, "r": r, "r_int": {k: math.ceil(v - 1e-9 * max(1.0, v)) for k, v in r.items()},
        "unclamped": raw, "unclamped_total": sum(raw.values()), "clamped": clamped, "residual": residual})


# closed forms

def strassen_shape(n: int) -> ProblemShape:
    """Nested Strassen on ``n x n`` matrices (``n`` a power of two)."""
    return ProblemShape(float(n) ** LOG2_7, n * n, n * n, n * n)


def conv_shape(n: int, d: int) -> ProblemShape:
    """Toom-n nested over ``d`` modes of length ``n``."""
    return ProblemShape(float(2 * n - 1) ** d, n ** d, n ** d, (2 * n - 1) ** d)


def strassen_sequential_closed(n: float, M: float) -> float:
    return max(2 * n ** LOG2_7 / M ** LOG2_3 * M, 3 * n * n)


def strassen_parallel_closed(n: float, P: float) -> float:
    return 3 * (n ** LOG3_7 / P ** LOG3_2 - n * n / P)


def conv_exponent(n: int) -> float:
    """``log_n(2n - 1)``."""
    return math.log(2 * n - 1) / math.log(n)


def conv_sequential_closed(n: int, d: int, M: float, factor: float = 2.0) -> float:
    """``max(factor (2n-1)^d M / M^{log_n(2n-1)}, 2 n^d + (2n-1)^d)``.

    ``factor=2`` follows the sequential bound; ``factor=1`` is the shorter
    form without the leading 2.
    """
    return max(factor * (2 * n - 1) ** d / M ** conv_exponent(n) * M, 2 * n ** d + (2 * n - 1) ** d)


def conv_parallel_closed(n: int, d: int, P: float) -> float:
    q = math.log(n) / math.log(2 * n - 1)
    return 2 * (n ** d / P ** q - n ** d / P)
