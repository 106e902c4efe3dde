"""Continuous stair relaxation of compact dense grids.

A stair is the region under a decreasing step profile in the first
quadrant.  With ``f = sigma_A^{-1}`` and ``g = sigma_B^{-1}`` its expansion
size is ``sum_i (f(x_i) - f(x_{i-1})) * g(y_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .optimize import maximize

Fn = Callable[[float], float]


class StairError(ValueError):
    pass


class NotApplicable:
    """Returned by :func:`phi_L` outside its range; falsy."""

    def __init__(self, reason: str):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NotApplicable({self.reason!r})"


def _ev(f, x: float) -> float:
    return f.eval(x) if hasattr(f, "eval") else float(f(x))


@dataclass(frozen=True)
class Stair:
    """Steps ``(x_right, height)``, left to right, widths positive and heights strictly decreasing."""

    steps: tuple[tuple[float, float], ...]

    def __post_init__(self):
        st = tuple((float(x), float(y)) for x, y in self.steps)
        object.__setattr__(self, "steps", st)
        if not st:
            raise StairError("a stair needs at least one step")
        xs = [x for x, _ in st]
        ys = [y for _, y in st]
        if xs[0] <= 0 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise StairError(f"step right edges must be positive and increasing: {xs}")
        if ys[-1] <= 0 or any(b >= a for a, b in zip(ys, ys[1:])):
            raise StairError(f"step heights must be positive and strictly decreasing: {ys}")

    @classmethod
    def from_heights(cls, heights: Sequence[float], widths: Sequence[float] | None = None) -> Stair:
        """Build from column heights (unit widths by default), merging equal neighbours."""
        widths = [1.0] * len(heights) if widths is None else list(widths)
        steps: list[list[float]] = []
        x = 0.0
        for h, w in zip(heights, widths):
            x += w
            if h <= 0:
                break
            if steps and abs(steps[-1][1] - h) <= 1e-12 * max(1.0, h):
                steps[-1][0] = x
            else:
                steps.append([x, float(h)])
        return cls(tuple((a, b) for a, b in steps))

    @classmethod
    def from_grid(cls, g) -> Stair:
        """Stair of a CDG (unit squares)."""
        if not g.is_cdg():
            raise StairError("grid is not a CDG")
        return cls.from_heights([h for h in g.heights() if h > 0])

    @property
    def area(self) -> float:
        out, prev = 0.0, 0.0
        for x, y in self.steps:
            out += (x - prev) * y
            prev = x
        return out

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class LShape:
    """``L(x1, y1; x2, y2)``: width ``x2`` up to height ``y1``, width ``x1`` up to ``y2``."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (0 < self.x1 < self.x2 and 0 < self.y1 < self.y2):
            raise StairError("L-shape needs 0 < x1 < x2 and 0 < y1 < y2")

    def to_stair(self) -> Stair:
        return Stair(((self.x1, self.y2), (self.x2, self.y1)))


def expansion_size(s: Stair | LShape, f, g) -> float:
    """``<S> = integral over S of df(x) dg(y)``."""
    if isinstance(s, LShape):
        s = s.to_stair()
    out, xprev, fprev = 0.0, 0.0, _ev(f, 0.0)
    for x, y in s.steps:
        fx = _ev(f, x)
        out += (fx - fprev) * _ev(g, y)
        xprev, fprev = x, fx
    return out


def _normalize(steps: list[tuple[float, float]]) -> Stair:
    out: list[list[float]] = []
    for x, y in steps:
        if y <= 1e-15:
            continue
        if out and x <= out[-1][0] * (1 + 1e-15):
            continue
        if out and abs(out[-1][1] - y) <= 1e-12 * max(1.0, y):
            out[-1][0] = x
        else:
            out.append([x, y])
    return Stair(tuple((a, b) for a, b in out))


def merge_candidates(s: Stair, k: int) -> tuple[Stair, Stair]:
    """``(M1, M2)`` for steps ``k`` and ``k+1`` (1-based)."""
    n = len(s.steps)
    if not 1 <= k < n:
        raise StairError(f"merge({k}, {k + 1}) needs 1 <= k < {n}")
    xs = [0.0] + [x for x, _ in s.steps]
    ys = [y for _, y in s.steps]
    x0, x1, x2 = xs[k - 1], xs[k], xs[k + 1]
    y_hi, y_lo = ys[k - 1], ys[k]
    ybar = ((x1 - x0) * y_hi + (x2 - x1) * y_lo) / (x2 - x0)
    w = x2 - x0
    # limits on u: the high step reaches step k-1, or the low step reaches step k+2
    y_above = ys[k - 2] if k >= 2 else math.inf
    y_below = ys[k + 1] if k + 1 < n else 0.0
    u_top = (y_above - ybar) * w / (x2 - x1)
    u_bot = (ybar - y_below) * w / (x1 - x0)
    u = min(u_top, u_bot)

    def build(u_: float) -> Stair:
        hi = ybar + (x2 - x1) / w * u_
        lo = ybar - (x1 - x0) / w * u_
        if u_ == u_top and u_top <= u_bot:
            hi = y_above  # snap to merge exactly with the neighbour
        if u_ == u_bot and u_bot < u_top:
            lo = y_below
        steps = list(s.steps[:k - 1]) + [(x1, hi), (x2, lo)] + list(s.steps[k + 1:])
        return _normalize(steps)

    return build(u), build(0.0)


def merge(s: Stair, k: int, f, g) -> Stair:
    """Area-preserving merge of steps ``k`` and ``k+1``; ties go to ``M1``."""
    m1, m2 = merge_candidates(s, k)
    return m1 if expansion_size(m1, f, g) >= expansion_size(m2, f, g) else m2


def phi_R(t: float, f, g, caps: tuple[float, float] | None = None) -> float:
    """``max f(t_A) g(t/t_A)`` over ``t_A`` in ``[max(1, t/r_B), min(r_A, t)]``."""
    if t < 1:
        raise StairError(f"phi_R needs t >= 1, got {t}")
    if caps is None:
        lo, hi = 1.0, float(t)
    else:
        ra, rb = map(float, caps)
        lo, hi = max(1.0, t / rb), min(ra, float(t))
        if lo > hi * (1 + 1e-12):
            raise StairError(f"t={t} infeasible under caps {caps}")
        hi = max(hi, lo)
    _, v = maximize(lambda ta: _ev(f, ta) * _ev(g, t / ta), lo, hi)
    return v


def phi_L(t: float, f, g, r_a: float, r_b: float, n_a: float, n_b: float) -> float | NotApplicable:
    """L-shaped expansion maximum along ``r_B x1 + r_A y1 - x1 y1 = t``.

    With ``c = r_A r_B - t`` the constraint reads ``y1 = r_B - c/(r_A - x1)``
    for ``x1`` in ``[0, r_A - c/r_B]``.
    """
    lo_t, hi_t = max(r_a, r_b), r_a * r_b
    if not (lo_t * (1 - 1e-12) <= t <= hi_t * (1 + 1e-12)):
        return NotApplicable(f"t={t} outside [{lo_t}, {hi_t}]")
    c = max(hi_t - t, 0.0)
    top = r_a - c / r_b

    def val(x1: float) -> float:
        y1 = r_b - c / (r_a - x1) if x1 < r_a else r_b
        y1 = min(max(y1, 0.0), r_b)
        fx, gy = _ev(f, x1), _ev(g, y1)
        return n_a * gy + n_b * fx - fx * gy

    if c == 0.0:
        return val(r_a)
    _, v = maximize(val, 0.0, max(top, 0.0))
    return v
