"""Rank-expansion lower bounds for Kronecker products from bounds on the factors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .optimize import minimize
from .sigma import Logarithmic, Monomial, NumericSigma, ShapeFlags, SigmaFn

METHODS = ("main-theorem", "nested-closed-form", "l-shaped", "l-shaped-reduced")


class ComposeError(ValueError):
    pass


@dataclass(frozen=True)
class OperandInfo:
    sigma: SigmaFn
    n: float | None
    d: float
    r: float | None
    flags: ShapeFlags

    @classmethod
    def of(cls, s: SigmaFn) -> OperandInfo:
        return cls(s, s.n, s.d, s.r, s.shape())

    def to_json_obj(self) -> dict:
        try:
            spec = self.sigma.to_spec()
        except Exception:  # numeric operands have no spec
            spec = repr(self.sigma)
        return {"sigma": spec, "n": self.n, "d": self.d, "r": self.r,
                "flags": {"concave": self.flags.concave, "log_log_concave": self.flags.log_log_concave,
                          "boundary_log_log_convex": self.flags.boundary_log_log_convex}}


@dataclass
class ComposedBound:
    """A composed bound: ``result`` is the sigma for the product."""

    result: SigmaFn
    method: str
    inputs: tuple[OperandInfo, ...]
    _argmin: Callable[[float], tuple[float, float] | None] | None = field(default=None, repr=False)

    def __call__(self, k) -> float:
        return self.result.eval(k)

    def eval(self, k) -> float:
        return self.result.eval(k)

    def argmin(self, k) -> tuple[float, float] | None:
        """Minimizing ``(k_A, k_B)`` where the method has one."""
        return None if self._argmin is None else self._argmin(float(k))

    def extrapolates(self, k) -> bool:
        """True when the minimizer leaves ``[0, n]`` on either axis."""
        am = self.argmin(k)
        if am is None or len(self.inputs) != 2:
            return False
        (ka, kb), (ia, ib) = am, self.inputs
        over = lambda x, n: n is not None and x > float(n) * (1 + 1e-9)
        return over(ka, ia.n) or over(kb, ib.n)


def _check_operand(s: SigmaFn, need_llc: bool = False) -> OperandInfo:
    info = OperandInfo.of(s)
    if abs(s.eval(0.0)) > 1e-12:
        raise ComposeError(f"operand {s!r} is not 0 at 0")
    if not info.flags.concave:
        raise ComposeError(f"operand {s!r} is not concave")
    if need_llc and not info.flags.log_log_concave:
        raise ComposeError(f"operand {s!r} is not log-log concave")
    return info


def min_product(sa: SigmaFn, sb: SigmaFn, k: float, a_rng: tuple[float, float],
                b_rng: tuple[float, float], boundary_only: bool = False) -> tuple[float, float, float]:
    """``min sa(k_A) sb(k_B)`` over the box with ``k_A k_B >= k``.

    Returns ``(value, k_A, k_B)``; ``value`` is ``inf`` when the box cannot
    reach ``k``.
    """
    (a0, a1), (b0, b1) = a_rng, b_rng
    if k <= a0 * b0:
        return sa.eval(a0) * sb.eval(b0), a0, b0
    lo = max(a0, k / b1) if b1 != math.inf else a0
    hi = min(a1, k / b0)
    if lo > hi * (1 + 1e-12):
        return math.inf, math.nan, math.nan
    hi = max(lo, hi)
    h = lambda x: sa.eval(x) * sb.eval(min(k / x, b1))
    if boundary_only:
        cands = [(h(lo), lo), (h(hi), hi)]
        v, x = min(cands)
    else:
        x, v = minimize(h, lo, hi)
        for e in (lo, hi):
            if h(e) <= v:
                v, x = h(e), e
    return v, x, k / x


def compose_main(sa: SigmaFn, sb: SigmaFn) -> ComposedBound:
    """``min sigma_A(k_A) sigma_B(k_B)`` over ``k_A >= d_A``, ``k_B >= d_B``, ``k_A k_B >= k``.

    Equals 1 for ``k <= d_A d_B``.  When both operands are log-log concave
    only the two ends of ``k_A`` in ``[d_A, k/d_B]`` are evaluated.
    """
    ia, ib = _check_operand(sa), _check_operand(sb)
    bnd = ia.flags.log_log_concave and ib.flags.log_log_concave

    def solve(k):
        return min_product(sa, sb, k, (ia.d, math.inf), (ib.d, math.inf), bnd)

    def fn(k):
        if k <= ia.d * ib.d:
            return 1.0 if k > 0 else 0.0
        return solve(k)[0]

    n = None if ia.n is None or ib.n is None else float(ia.n) * float(ib.n)
    res = NumericSigma(fn, n=n, label="main-theorem")
    return ComposedBound(res, "main-theorem", (ia, ib), lambda k: solve(k)[1:])


def compose_nested(ss: Sequence[SigmaFn]) -> ComposedBound:
    """``min_j sigma_j(k / prod_{i != j} d_i)`` with monomial and logarithmic closed forms."""
    ss = list(ss)
    if len(ss) < 2:
        raise ComposeError("nested composition needs at least two operands")
    infos = tuple(_check_operand(s, need_llc=True) for s in ss)
    ns = [i.n for i in infos]
    n = math.prod(float(x) for x in ns) if all(x is not None for x in ns) else None
    ds = [i.d for i in infos]
    if all(isinstance(s, Monomial) for s in ss):
        q = min((s.q for s in ss), key=float)
        qlab = next((s.q_label for s in ss if s.q == q), None)
        k0 = math.prod(ds)
        if all(float(x).is_integer() for x in ds):
            k0 = int(round(k0))
        return ComposedBound(Monomial(1, q, k0, n=n, q_label=qlab), "nested-closed-form", infos)
    if all(isinstance(s, Logarithmic) for s in ss):
        a = min(s.a for s in ss)
        denom = math.prod(math.expm1(1.0 / s.a) / s.b for s in ss)
        b = math.expm1(1.0 / a) / denom
        return ComposedBound(Logarithmic(a, b, n=n), "nested-closed-form", infos)
    total = math.prod(ds)

    def fn(k):
        return min(s.eval(k * d / total) for s, d in zip(ss, ds))

    flags = ShapeFlags(True, True, False)
    return ComposedBound(NumericSigma(fn, n=n, label="nested", flags=flags), "nested-closed-form", infos)


def compose_lshaped(sa: SigmaFn, sb: SigmaFn) -> ComposedBound:
    """Bound that only evaluates the operands on ``[0, n_A]`` and ``[0, n_B]``.

    ``R_C`` is the capped product minimum and ``L_C`` the L-shaped one,
    parametrized by ``c = n_A n_B - k`` as ``k_B = n_B - c/(n_A - k_A)``.
    The result is ``min(R_C, L_C)``, or ``R_C`` alone when
    ``R_C <= max(r_A, r_B)`` or when both boundary flags hold.  Past that
    point the value is floored at ``max(r_A, r_B)``.
    """
    ia, ib = _check_operand(sa), _check_operand(sb)
    if ia.n is None or ib.n is None:
        raise ComposeError("l-shaped composition needs domain hints n on both operands")
    na, nb = float(ia.n), float(ib.n)
    ra, rb = float(ia.r), float(ib.r)
    reduced = ia.flags.boundary_log_log_convex and ib.flags.boundary_log_log_convex
    bnd = reduced and ia.flags.log_log_concave and ib.flags.log_log_concave
    full = na * nb

    def r_c(k):
        if k <= ia.d * ib.d:
            return (1.0 if k > 0 else 0.0), ia.d, ib.d
        return min_product(sa, sb, min(k, full), (ia.d, na), (ib.d, nb), bnd)

    def l_c(k):
        c = full - k
        if c <= 0:
            return ra * rb
        top = na - c / nb

        def h(ka):
            kb = nb - c / (na - ka) if ka < na else nb
            kb = min(max(kb, 0.0), nb)
            return ra * rb - (ra - sa.eval(ka)) * (rb - sb.eval(kb))

        _, v = minimize(h, 0.0, max(top, 0.0))
        return min(v, h(0.0), h(max(top, 0.0)))

    def fn(k):
        rv = r_c(k)[0]
        if reduced or rv <= max(ra, rb) * (1 + 1e-12):
            return rv
        # R_C is continuous and already certified up to max(r_A, r_B); keeps the result nondecreasing
        return max(min(rv, l_c(k)), max(ra, rb))

    res = NumericSigma(fn, n=full, label="l-shaped")
    cb = ComposedBound(res, "l-shaped-reduced" if reduced else "l-shaped", (ia, ib), lambda k: r_c(k)[1:])
    cb.R_C = lambda k: r_c(float(k))[0]
    cb.L_C = l_c
    return cb


def compose(method: str, ss: Sequence[SigmaFn]) -> ComposedBound:
    """Dispatch on ``main``, ``nested`` or ``lshaped``."""
    if method == "main":
        if len(ss) != 2:
            raise ComposeError("main composition takes exactly two operands")
        return compose_main(*ss)
    if method == "nested":
        return compose_nested(ss)
    if method == "lshaped":
        if len(ss) != 2:
            raise ComposeError("l-shaped composition takes exactly two operands")
        return compose_lshaped(*ss)
    raise ComposeError(f"unknown method {method!r}")
