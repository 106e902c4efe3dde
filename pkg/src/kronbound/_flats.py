"""Compiled kernel: canonical enumeration of matroid flats over GF(p).

A flat is visited once, through its greedy basis in index order: adding
``g`` to a flat is canonical iff no column with index below ``g`` becomes
newly spanned.  Each node keeps the residuals of all columns modulo the
current span, so a child costs one elimination pass.  At depth ``cap`` the
nonzero residuals are grouped into projective classes by a hash
``h1(r)/h2(r)``; the largest class plus the flat gives the largest flat of
rank ``cap + 1`` containing it.
"""
from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def _inv(a, p):
    r = 1
    e = p - 2
    a %= p
    while e:
        if e & 1:
            r = r * a % p
        a = a * a % p
        e >>= 1
    return r


@nb.njit(cache=True)
def enumerate_flats(E, cap, h1w, h2w, p, budget):
    """Largest flat of each rank ``0..cap+1`` over GF(p).

    Args:
        E: ``(n, m)`` int64 array, column vectors reduced mod ``p``.
        cap: deepest rank explored as a flat.
        h1w, h2w: random weights for the class hashes.
        p: prime below 2**31.
        budget: maximal number of extension attempts.

    Returns:
        ``(best, members, attempts, finished)``: ``best[r]`` is the size of
        the largest rank-``r`` flat found, ``members[r]`` a membership mask of
        one such flat.
    """
    n, m = E.shape
    Y = np.zeros((cap + 1, n, m), np.int64)
    H1 = np.zeros((cap + 1, n), np.int64)
    H2 = np.zeros((cap + 1, n), np.int64)
    Z = np.zeros((cap + 1, n), np.bool_)
    for e in range(n):
        s1 = 0
        s2 = 0
        nz = False
        for c in range(m):
            v = E[e, c]
            Y[0, e, c] = v
            if v != 0:
                nz = True
            s1 = (s1 + v * h1w[c]) % p
            s2 = (s2 + v * h2w[c]) % p
        H1[0, e] = s1
        H2[0, e] = s2
        Z[0, e] = not nz
    best = np.zeros(cap + 2, np.int64)
    members = np.zeros((cap + 2, n), np.bool_)
    nxt = np.zeros(cap + 2, np.int64)
    keys = np.zeros(n, np.int64)
    pref = np.zeros(n, np.int64)
    idx = np.zeros(n, np.int64)
    attempts = 0
    d = 0
    fresh = True
    while d >= 0:
        if fresh:
            fresh = False
            sz = 0
            for e in range(n):
                if Z[d, e]:
                    sz += 1
            if sz > best[d]:
                best[d] = sz
                for e in range(n):
                    members[d, e] = Z[d, e]
            if d == cap:
                cnt = 0
                acc = 1
                nbad = 0
                for e in range(n):
                    if not Z[d, e]:
                        if H2[d, e] == 0:
                            nbad += 1  # merged into one bucket; only overcounts
                            continue
                        idx[cnt] = e
                        pref[cnt] = acc
                        acc = acc * H2[d, e] % p
                        cnt += 1
                bestrun = nbad
                bestkey = -1
                if cnt > 0:
                    inv = _inv(acc, p)
                    for t in range(cnt - 1, -1, -1):
                        e = idx[t]
                        ie = inv * pref[t] % p
                        inv = inv * H2[d, e] % p
                        keys[t] = H1[d, e] * ie % p
                    order = np.argsort(keys[:cnt])
                    run = 0
                    for t in range(cnt):
                        if t > 0 and keys[order[t]] == keys[order[t - 1]]:
                            run += 1
                        else:
                            run = 1
                        if run > bestrun:
                            bestrun = run
                            bestkey = keys[order[t]]
                if bestrun > 0 and sz + bestrun > best[d + 1]:
                    best[d + 1] = sz + bestrun
                    for e in range(n):
                        members[d + 1, e] = Z[d, e]
                    if bestkey == -1:
                        for e in range(n):
                            if not Z[d, e] and H2[d, e] == 0:
                                members[d + 1, e] = True
                    else:
                        for t in range(cnt):
                            if keys[t] == bestkey:
                                members[d + 1, idx[t]] = True
                d -= 1
                continue
        g = nxt[d]
        advanced = False
        while g < n:
            if Z[d, g]:
                g += 1
                continue
            attempts += 1
            if attempts > budget:
                return best, members, attempts, False
            c0 = 0
            while Y[d, g, c0] == 0:
                c0 += 1
            ginv = _inv(Y[d, g, c0], p)
            ok = True
            for e in range(n):
                if Z[d, e]:
                    Z[d + 1, e] = True
                    continue
                lam = Y[d, e, c0] * ginv % p
                nz = False
                if lam == 0:
                    for c in range(m):
                        Y[d + 1, e, c] = Y[d, e, c]
                    H1[d + 1, e] = H1[d, e]
                    H2[d + 1, e] = H2[d, e]
                    nz = True
                else:
                    for c in range(m):
                        v = (Y[d, e, c] - lam * Y[d, g, c]) % p
                        Y[d + 1, e, c] = v
                        if v != 0:
                            nz = True
                    H1[d + 1, e] = (H1[d, e] - lam * H1[d, g]) % p
                    H2[d + 1, e] = (H2[d, e] - lam * H2[d, g]) % p
                Z[d + 1, e] = not nz
                if (not nz) and e < g:
                    ok = False
                    break
            g += 1
            if ok:
                nxt[d] = g
                d += 1
                nxt[d] = g
                fresh = True
                advanced = True
                break
        if not advanced:
            d -= 1
    return best, members, attempts, True


def modp_columns(columns, p: int) -> np.ndarray:
    """Integer-scaled columns reduced mod ``p`` as an ``(n, m)`` int64 array."""
    from math import lcm

    out = np.zeros((len(columns), len(columns[0])), np.int64)
    for j, col in enumerate(columns):
        den = lcm(*(x.denominator for x in col))
        for i, x in enumerate(col):
            out[j, i] = int(x * den) % p
    return out
