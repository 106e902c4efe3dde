"""Bounded 1-D optimization: dense sweep, then golden-section refinement."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

SWEEP_POINTS = 1024
REL_TOL = 1e-9
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _grid(lo: float, hi: float, num: int) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    lin = np.linspace(lo, hi, num)
    if lo > 0:
        pts = np.concatenate([lin, np.geomspace(lo, hi, num)])
    else:
        # log spacing toward the zero end as well
        pts = np.concatenate([lin, np.geomspace(hi * 1e-12, hi, num), [0.0]])
    pts = np.unique(np.clip(pts, lo, hi))
    return pts


def golden_min(h: Callable[[float], float], a: float, b: float, tol: float = REL_TOL) -> tuple[float, float]:
    """Golden-section minimum of ``h`` on ``[a, b]``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    hc, hd = h(c), h(d)
    while abs(b - a) > tol * max(1.0, abs(a), abs(b)):
        if hc <= hd:
            b, d, hd = d, c, hc
            c = b - _INVPHI * (b - a)
            hc = h(c)
        else:
            a, c, hc = c, d, hd
            d = a + _INVPHI * (b - a)
            hd = h(d)
    return (c, hc) if hc <= hd else (d, hd)


def minimize(h: Callable[[float], float], lo: float, hi: float,
             num: int = SWEEP_POINTS) -> tuple[float, float]:
    """Approximate global minimum of ``h`` on ``[lo, hi]``; returns ``(x, h(x))``.

    Endpoints are always candidates, so boundary minima are exact.
    """
    if hi < lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    xs = _grid(lo, hi, num)
    vals = np.array([h(float(x)) for x in xs])
    i = int(np.argmin(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    if xs.size > 2:
        a = float(xs[max(i - 1, 0)])
        b = float(xs[min(i + 1, xs.size - 1)])
        if b > a:
            x, v = golden_min(h, a, b)
            if v < best_v:
                best_x, best_v = x, v
    return best_x, best_v


def maximize(h: Callable[[float], float], lo: float, hi: float,
             num: int = SWEEP_POINTS) -> tuple[float, float]:
    x, v = minimize(lambda t: -h(t), lo, hi, num)
    return x, -v
