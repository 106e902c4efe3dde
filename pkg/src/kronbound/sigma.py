"""Increasing lower-bound functions for rank expansion.

A :class:`SigmaFn` is a continuous nondecreasing map on ``[0, inf)`` with a
domain hint ``n`` (the column count it is meant for).  The same type is used
for the inverse role (``f = sigma^{-1}``) in the stair module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

REL_SLACK = 1e-9  # threshold comparisons
SHAPE_REL_SLACK = 1e-12  # sampled shape checks
SHAPE_SAMPLES = 10_000


class SigmaError(ValueError):
    """Invalid sigma specification or evaluation request."""


def leq(a: float, y: float) -> bool:
    """``a <= y`` up to the relative comparison slack."""
    return a <= y + REL_SLACK * abs(y)


@dataclass(frozen=True)
class ShapeFlags:
    concave: bool
    log_log_concave: bool
    boundary_log_log_convex: bool


def _num(x) -> float:
    return float(x)


class SigmaFn:
    """Base class; subclasses implement ``_eval`` and optionally ``_pinv``."""

    n: float | None = None

    def __call__(self, x) -> float:
        return self.eval(x)

    def eval(self, x) -> float:
        x = _num(x)
        if x < 0:
            raise SigmaError(f"sigma evaluated at negative argument {x}")
        return self._eval(x)

    def _eval(self, x: float) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def pseudoinverse(self, y) -> float:
        """``sup{k >= 0 : f(k) <= y}``; ``inf`` when ``f`` never exceeds ``y``."""
        y = _num(y)
        if y < 0:
            raise SigmaError("pseudoinverse of a negative value")
        closed = self._pinv(y)
        if closed is not None:
            return closed
        return bisect_pinv(self._eval, y)

    def _pinv(self, y: float) -> float | None:
        return None

    @property
    def d(self) -> float:
        """Threshold ``sigma^dagger(1)``."""
        return self.pseudoinverse(1.0)

    @property
    def r(self) -> float | None:
        """Value at the domain hint, if one is set."""
        return None if self.n is None else self.eval(self.n)

    def shape(self) -> ShapeFlags:
        return check_shape(self)

    def _analytic_shape(self) -> ShapeFlags | None:
        return None

    def to_spec(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def with_n(self, n):
        """Copy carrying a different domain hint."""
        import copy

        other = copy.copy(self)
        object.__setattr__(other, "n", n)
        return other


def bisect_pinv(f: Callable[[float], float], y: float, lo: float = 0.0) -> float:
    """Monotone bisection for ``sup{k : f(k) <= y}``."""
    if f(lo) > y:
        return lo
    hi = max(1.0, 2 * lo)
    while f(hi) <= y:
        lo = hi
        hi *= 2.0
        if hi > 2.0 ** 200:
            return math.inf
    for _ in range(400):
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if f(mid) <= y:
            lo = mid
        else:
            hi = mid
    return lo


def floor_pseudoinverse_int(f: SigmaFn, y, cap: int) -> int:
    """Largest integer ``m`` in ``[0, cap]`` with ``f(m) <= y``.

    Uses integer bisection on evaluations, so exact hit points such as
    ``3**log3(2) == 2`` are not lost to float flooring. Returns 0 when even
    ``f(0)`` exceeds ``y``.
    """
    if cap < 0:
        raise SigmaError("cap must be nonnegative")
    y = _num(y)
    if leq(f.eval(cap), y):
        return cap
    lo, hi = 0, cap  # f(lo) <= y < f(hi), assuming f(0) <= y
    if not leq(f.eval(0), y):
        return 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if leq(f.eval(mid), y):
            lo = mid
        else:
            hi = mid
    return lo


# closed-form kinds

@dataclass(frozen=True, eq=True)
class Monomial(SigmaFn):
    """``a * (k / k0) ** q`` with ``0 < q <= 1``."""

    a: float | Fraction = 1
    q: float | Fraction = 1
    k0: float | Fraction = 1
    n: float | None = None
    q_label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (0 < float(self.q) <= 1):
            raise SigmaError(f"monomial exponent must lie in (0, 1], got {self.q}")
        if float(self.a) <= 0 or float(self.k0) <= 0:
            raise SigmaError("monomial needs a > 0 and k0 > 0")

    def _eval(self, x):
        if x == 0:
            return 0.0
        return float(self.a) * (x / float(self.k0)) ** float(self.q)

    def _pinv(self, y):
        return float(self.k0) * (y / float(self.a)) ** (1.0 / float(self.q))

    def _analytic_shape(self):
        # n^q - (n-x)^q has a positive power series in x/n
        return ShapeFlags(True, True, self.n is not None)

    def to_spec(self):
        q = {"log": list(_log_pair(self.q_label))} if self.q_label and _log_pair(self.q_label) else _jsonnum(self.q)
        return _with_n({"kind": "monomial", "a": _jsonnum(self.a), "q": q, "k0": _jsonnum(self.k0)}, self.n)


@dataclass(frozen=True)
class Logarithmic(SigmaFn):
    """``a * ln(b*k + 1)``."""

    a: float = 1.0
    b: float = 1.0
    n: float | None = None

    def __post_init__(self):
        if float(self.a) <= 0 or float(self.b) <= 0:
            raise SigmaError("logarithmic needs a > 0 and b > 0")

    def _eval(self, x):
        return float(self.a) * math.log1p(float(self.b) * x)

    def _pinv(self, y):
        return math.expm1(y / float(self.a)) / float(self.b)

    def _analytic_shape(self):
        # -ln(1 - w) has a positive power series
        return ShapeFlags(True, True, self.n is not None)

    def to_spec(self):
        return _with_n({"kind": "logarithmic", "a": _jsonnum(self.a), "b": _jsonnum(self.b)}, self.n)


@dataclass(frozen=True)
class ClampedLinear(SigmaFn):
    """``min(k, r)``; the rank expansion of a full-Kruskal matrix of rank ``r``."""

    cap: float | Fraction = 1
    n: float | None = None

    def __post_init__(self):
        if float(self.cap) <= 0:
            raise SigmaError("clamped-linear cap must be positive")

    def _eval(self, x):
        return min(x, float(self.cap))

    def _pinv(self, y):
        return math.inf if y >= float(self.cap) else y

    def _analytic_shape(self):
        # r - sigma(n - x) is identically 0 near x = 0 when n > cap
        return ShapeFlags(True, True, self.n is not None and float(self.n) <= float(self.cap))

    def to_spec(self):
        return _with_n({"kind": "clamped-linear", "r": _jsonnum(self.cap)}, self.n)


_SEGMENT_KINDS = ("affine", "power", "exponential", "logarithmic")


@dataclass(frozen=True)
class Segment:
    """One piece on ``(start, end]``; ``shift`` defaults to ``start``.

    affine: ``c + m*(x-shift)``; power: ``c + a*(x-shift)**q``;
    exponential: ``c + a*exp(lam*(x-shift))``; logarithmic: ``c + a*ln(b*(x-shift)+1)``.
    """

    end: float
    kind: str
    coeffs: dict

    def value(self, x: float, start: float) -> float:
        c = self.coeffs
        s = float(c.get("shift", start))
        off = float(c.get("c", 0.0))
        if self.kind == "affine":
            return off + float(c["m"]) * (x - s)
        if self.kind == "power":
            return off + float(c["a"]) * max(x - s, 0.0) ** float(c["q"])
        if self.kind == "exponential":
            return off + float(c["a"]) * math.exp(float(c["lam"]) * (x - s))
        if self.kind == "logarithmic":
            return off + float(c["a"]) * math.log1p(float(c["b"]) * (x - s))
        raise SigmaError(f"unknown segment kind {self.kind!r}")


class PiecewiseClosedForm(SigmaFn):
    """Continuous piecewise function built from closed-form segments.

    The first segment starts at 0; beyond the last breakpoint the last
    segment is extended.
    """

    def __init__(self, segments: Sequence[Segment | tuple], n: float | None = None):
        segs = []
        for s in segments:
            if not isinstance(s, Segment):
                end, kind, coeffs = s
                s = Segment(float(end), kind, dict(coeffs))
            if s.kind not in _SEGMENT_KINDS:
                raise SigmaError(f"unknown segment kind {s.kind!r}")
            segs.append(s)
        if not segs:
            raise SigmaError("piecewise function needs at least one segment")
        ends = [s.end for s in segs]
        if any(b <= a for a, b in zip(ends, ends[1:])) or ends[0] <= 0:
            raise SigmaError("segment breakpoints must be positive and increasing")
        self.segments = tuple(segs)
        self.starts = (0.0,) + tuple(ends[:-1])
        self.n = n
        for k in range(1, len(segs)):
            x = self.starts[k]
            left = segs[k - 1].value(x, self.starts[k - 1])
            right = segs[k].value(x, x)
            if abs(left - right) > REL_SLACK * max(1.0, abs(left)):
                raise SigmaError(f"discontinuity at breakpoint {x}: {left} vs {right}")
        if self._eval(0.0) < -1e-15:
            raise SigmaError("piecewise function is negative at 0")
        hi = float(n) if n is not None else ends[-1]
        xs = np.linspace(0.0, max(hi, ends[-1]), 2001)
        ys = np.array([self._eval(x) for x in xs])
        if np.any(np.diff(ys) < -REL_SLACK * np.maximum(1.0, np.abs(ys[1:]))):
            raise SigmaError("piecewise function is not nondecreasing")

    @classmethod
    def from_table(cls, points: Sequence[tuple], n: float | None = None) -> PiecewiseClosedForm:
        """Piecewise-affine interpolation through ``(x, y)`` points; ``(0, 0)`` is implied."""
        pts = sorted((float(x), float(y)) for x, y in points)
        if pts[0][0] != 0.0:
            pts.insert(0, (0.0, 0.0))
        segs = []
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            segs.append(Segment(x1, "affine", {"m": (y1 - y0) / (x1 - x0), "c": y0}))
        if n is None:
            n = pts[-1][0]
        return cls(segs, n=n)

    def _eval(self, x):
        for k, s in enumerate(self.segments):
            if x <= s.end or k == len(self.segments) - 1:
                return s.value(x, self.starts[k])
        raise AssertionError("unreachable")

    def to_spec(self):
        segs = [{"end": s.end, "kind": s.kind, **{k: _jsonnum(v) for k, v in s.coeffs.items()}}
                for s in self.segments]
        return _with_n({"kind": "piecewise", "segments": segs}, self.n)

    def __repr__(self):
        return f"PiecewiseClosedForm({len(self.segments)} segments, n={self.n})"


class PiecewiseMin(SigmaFn):
    """Pointwise minimum of several sigma functions."""

    def __init__(self, operands: Sequence[SigmaFn], n: float | None = None):
        if not operands:
            raise SigmaError("min of no operands")
        self.operands = tuple(operands)
        self.n = n if n is not None else next((o.n for o in operands if o.n is not None), None)

    def _eval(self, x):
        return min(o._eval(x) for o in self.operands)

    def _pinv(self, y):
        return max(o.pseudoinverse(y) for o in self.operands)

    def to_spec(self):
        return _with_n({"kind": "min", "operands": [o.to_spec() for o in self.operands]}, self.n)

    def __repr__(self):
        return f"PiecewiseMin({list(self.operands)!r})"


class NumericSigma(SigmaFn):
    """Sigma backed by a numeric procedure, memoized per argument."""

    def __init__(self, fn: Callable[[float], float], n: float | None = None, label: str = "numeric",
                 flags: ShapeFlags | None = None):
        self._fn = fn
        self._memo: dict[float, float] = {}
        self.n = n
        self.label = label
        self._flags = flags

    def _eval(self, x):
        v = self._memo.get(x)
        if v is None:
            v = float(self._fn(x))
            self._memo.setdefault(x, v)
        return v

    def _analytic_shape(self):
        return self._flags

    def to_spec(self):
        raise SigmaError(f"{self.label} sigma has no closed-form spec")

    def __repr__(self):
        return f"NumericSigma({self.label}, n={self.n})"


# shape checks

def _sampled_concave(xs: np.ndarray, ys: np.ndarray) -> bool:
    s = np.diff(ys) / np.diff(xs)
    if s.size < 2:
        return True
    scale = np.maximum(np.abs(s[1:]), np.abs(s[:-1]))
    # absolute floor for float cancellation in the differences
    floor = 64 * np.finfo(float).eps * (np.abs(ys).max() + 1.0) / np.diff(xs).min()
    return bool(np.all(s[1:] <= s[:-1] + SHAPE_REL_SLACK * scale + floor))


def _loglog(f: Callable[[float], float], lo: float, hi: float, num: int):
    xs = np.geomspace(lo, hi, num)
    ys = np.array([f(x) for x in xs])
    keep = ys > 0
    return np.log(xs), ys, keep


def _sample_llc(f, lo, hi, convex=False) -> bool:
    lx, ys, keep = _loglog(f, lo, hi, SHAPE_SAMPLES)
    if convex and not np.all(keep):
        return False  # log of zero on an interior interval
    lx, ly = lx[keep], np.log(ys[keep])
    if lx.size < 3:
        return True
    return _sampled_concave(lx, -ly if convex else ly)


def check_shape(f: SigmaFn) -> ShapeFlags:
    """Concavity, log-log concavity and the boundary log-log convexity of ``r - f(n - x)``."""
    flags = f._analytic_shape()
    if flags is not None:
        return flags
    hi = float(f.n) if f.n is not None else 1e3
    if isinstance(f, PiecewiseClosedForm):
        hi = max(hi, f.segments[-1].end) if f.n is None else hi
    xs = np.linspace(0.0, hi, SHAPE_SAMPLES)
    ys = np.array([f._eval(x) for x in xs])
    if isinstance(f, PiecewiseMin) and all(o.shape().concave for o in f.operands):
        concave = True
    else:
        concave = _sampled_concave(xs, ys)
    llc = _sample_llc(f._eval, hi * 1e-6, hi)
    boundary = False
    if f.n is not None:
        n = float(f.n)
        r = f._eval(n)
        boundary = _sample_llc(lambda x: r - f._eval(n - x), n * 1e-6, n, convex=True)
    return ShapeFlags(concave, llc, boundary)


# JSON specs

def _jsonnum(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    return x


def _with_n(d: dict, n):
    if n is not None:
        d["n"] = _jsonnum(n)
    return d


def _log_pair(label: str | None):
    if label and label.startswith("log") and ":" in label:
        b, a = label[3:].split(":")
        return (int(b), int(a))
    return None


def _parse_num(v, what: str):
    if isinstance(v, dict) and "log" in v:
        base, arg = v["log"]
        return math.log(float(arg)) / math.log(float(base)), f"log{int(base)}:{int(arg)}"
    if isinstance(v, str):
        try:
            return Fraction(v), None
        except ValueError as exc:
            raise SigmaError(f"bad number for {what}: {v!r}") from exc
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return v, None
    raise SigmaError(f"bad number for {what}: {v!r}")


def log_exponent(base: int, arg: int) -> float:
    """``log_base(arg)`` as a float."""
    return math.log(arg) / math.log(base)


def from_spec(spec: dict) -> SigmaFn:
    """Build a sigma function from its JSON spec."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SigmaError("sigma spec must be an object with a 'kind'")
    kind = spec["kind"]
    n = _parse_num(spec["n"], "n")[0] if "n" in spec else None
    try:
        if kind == "monomial":
            q, label = _parse_num(spec.get("q", 1), "q")
            return Monomial(_parse_num(spec.get("a", 1), "a")[0], q,
                            _parse_num(spec.get("k0", 1), "k0")[0], n=n, q_label=label)
        if kind == "logarithmic":
            return Logarithmic(float(_parse_num(spec.get("a", 1), "a")[0]),
                               float(_parse_num(spec.get("b", 1), "b")[0]), n=n)
        if kind in ("clamped-linear", "clamped_linear"):
            return ClampedLinear(_parse_num(spec["r"], "r")[0], n=n)
        if kind == "identity":
            return Monomial(1, 1, 1, n=n)
        if kind == "zero":
            return PiecewiseClosedForm([(1.0, "affine", {"m": 0, "c": 0})], n=n)
        if kind == "piecewise":
            segs = []
            for s in spec["segments"]:
                s = dict(s)
                end, sk = float(s.pop("end")), s.pop("kind")
                segs.append(Segment(end, sk, {k: float(_parse_num(v, k)[0]) for k, v in s.items()}))
            return PiecewiseClosedForm(segs, n=n)
        if kind == "table":
            return PiecewiseClosedForm.from_table([tuple(p) for p in spec["points"]], n=n)
        if kind == "min":
            return PiecewiseMin([from_spec(o) for o in spec["operands"]], n=n)
    except KeyError as exc:
        raise SigmaError(f"sigma spec of kind {kind!r} is missing {exc}") from exc
    raise SigmaError(f"unknown sigma kind {kind!r}")
