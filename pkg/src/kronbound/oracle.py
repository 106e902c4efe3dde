"""Exact rank expansion by exhaustive search.

``sigma~(k) = min rank over k-column subsets`` equals ``min{r : some rank-r
flat has >= k columns}``, so the search enumerates flats instead of subsets.

Lower bounds come from a complete flat enumeration over GF(p): the rank of
a subset mod p never exceeds its rational rank, and the class hashing only
merges classes, so every value found is a certified lower bound.  Upper
bounds come from explicit column sets whose rational rank is checked with
exact Bareiss elimination.  A value is reported only when the two meet.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .linalg import EliminationState, RationalMatrix, kron, rank, rank_of_vectors
from .sigma import SigmaFn, leq

DEFAULT_BUDGET = 10_000_000
PRIMES = (2147483647, 2147483629, 2147483587)


class BudgetExceeded(RuntimeError):
    """Enumeration stopped before the requested values were determined."""

    def __init__(self, k_reached: int, budget: int, partial: Sequence[int] = ()):
        self.k_reached = k_reached
        self.budget = budget
        self.partial = tuple(partial)
        super().__init__(f"oracle budget of {budget} exhausted; values known up to k={k_reached}")


class OracleError(RuntimeError):
    """Lower and upper bounds failed to meet (unlucky prime on every retry)."""


def default_budget() -> int:
    env = os.environ.get("KRONBOUND_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_BUDGET


@dataclass(frozen=True)
class RankExpansionTable:
    """``values[k-1] = sigma~(k)`` for ``k = 1..len(values)``."""

    n: int
    values: tuple[int, ...]

    def __post_init__(self):
        v = self.values
        if v and v[0] not in (0, 1):
            raise ValueError("sigma~(1) must be 0 or 1")
        for a, b in zip(v, v[1:]):
            if not (a <= b <= a + 1):
                raise ValueError(f"rank expansion table violates monotonicity: {v}")

    def __getitem__(self, k: int) -> int:
        if not 1 <= k <= len(self.values):
            raise IndexError(f"sigma~({k}) not in table of length {len(self.values)}")
        return self.values[k - 1]

    def __len__(self) -> int:
        return len(self.values)

    def as_list(self) -> list[int]:
        return list(self.values)


@dataclass
class _Bounds:
    k_max: int
    lo: list[int]
    hi: list[int]
    witness: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def settled(self) -> int:
        """Largest ``k`` such that every value up to ``k`` is settled."""
        k = 0
        while k < self.k_max and self.lo[k] == self.hi[k]:
            k += 1
        return k

    def add_witness(self, cols: Sequence[int], r: int):
        for k in range(1, min(len(cols), self.k_max) + 1):
            if r < self.hi[k - 1]:
                self.hi[k - 1] = r
                self.witness[k] = tuple(sorted(cols))[:k]
        for k in range(1, self.k_max):
            self.hi[k] = min(self.hi[k], self.hi[k - 1] + 1)


def _closure(cols: list, idx: Iterable[int]) -> tuple[int, ...]:
    st = EliminationState(len(cols[0]))
    for i in idx:
        st.add(cols[i])
    return tuple(i for i in range(len(cols)) if st.contains(cols[i]))


def all_flats(m: RationalMatrix) -> dict[tuple[int, ...], int]:
    """Every flat of the column matroid (0-based indices) mapped to its rank.

    Exact arithmetic; intended for the small factors of a Kronecker product.
    """
    cols = m.columns()
    start = _closure(cols, [])
    flats = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for f in frontier:
            r = flats[f]
            for e in range(m.cols):
                if e in f:
                    continue
                g = _closure(cols, list(f) + [e])
                if g not in flats:
                    flats[g] = r + 1
                    nxt.append(g)
        frontier = nxt
    return flats


def kron_witness_sets(a: RationalMatrix, b: RationalMatrix) -> list[tuple[int, ...]]:
    """Column sets of ``kron(a, b)`` shaped as one- and two-step staircases of flats.

    ``F1 x G1 u F2 x G2`` with ``F1 <= F2`` and ``G2 <= G1`` spans
    ``V_F1 (x) V_G1 + V_F2 (x) V_G2``; rectangles and crosses are special cases.
    """
    fa, fb = all_flats(a), all_flats(b)
    nb = b.cols
    best: dict[int, tuple[int, tuple[int, ...]]] = {}

    def offer(rk: int, pts: set):
        if len(pts) > best.get(rk, (-1, ()))[0]:
            best[rk] = (len(pts), tuple(sorted(i * nb + j for i, j in pts)))

    def rect(f, g):
        return {(i, j) for i in f for j in g}

    for f1, r1 in fa.items():
        for g1, s1 in fb.items():
            rk, size = r1 * s1, len(f1) * len(g1)
            if size > best.get(rk, (-1, ()))[0]:
                offer(rk, rect(f1, g1))
    chains_a = [(f1, r1, f2, r2) for f1, r1 in fa.items() for f2, r2 in fa.items()
                if r1 < r2 and set(f1) < set(f2)]
    chains_b = [(g2, s2, g1, s1) for g2, s2 in fb.items() for g1, s1 in fb.items()
                if s2 < s1 and set(g2) < set(g1)]
    for f1, r1, f2, r2 in chains_a:
        for g2, s2, g1, s1 in chains_b:
            rk = r1 * s1 + r2 * s2 - r1 * s2
            size = len(f1) * len(g1) + len(f2) * len(g2) - len(f1) * len(g2)
            if size > best.get(rk, (-1, ()))[0]:
                offer(rk, rect(f1, g1) | rect(f2, g2))
    return [pts for _, pts in best.values()]


def _run(cols_q: list, k_max: int, budget: int, witnesses, p: int, seed: int):
    from ._flats import enumerate_flats, modp_columns

    n = len(cols_q)
    E = modp_columns(cols_q, p)
    total_rank = rank_of_vectors(cols_q)
    bounds = _Bounds(k_max, [0] * k_max, [min(k, total_rank) for k in range(1, k_max + 1)])
    for w in witnesses:
        bounds.add_witness(w, rank_of_vectors([cols_q[i] for i in w]))
    rng = np.random.default_rng(seed)
    h1 = rng.integers(1, p, E.shape[1]).astype(np.int64)
    h2 = rng.integers(1, p, E.shape[1]).astype(np.int64)
    spent = 0
    cap = 0
    while True:
        best, members, used, done = enumerate_flats(E, cap, h1, h2, p, budget - spent)
        spent += used
        if not done:
            raise BudgetExceeded(bounds.settled(), budget, bounds.lo[:bounds.settled()])
        top = cap + 1 if cap + 1 <= total_rank else cap
        for r in range(top + 1):
            if best[r] == 0 and r > 0:
                continue
            mem = [i for i in range(n) if members[r, i]]
            if mem:
                bounds.add_witness(mem, rank_of_vectors([cols_q[i] for i in mem]))
        # lower bounds from the GF(p) flat sizes
        for k in range(1, k_max + 1):
            lb = next((r for r in range(top + 1) if best[r] >= k), top + 1)
            bounds.lo[k - 1] = max(bounds.lo[k - 1], lb)
        for k in range(1, k_max):
            bounds.lo[k] = max(bounds.lo[k], bounds.lo[k - 1])
        if bounds.settled() == k_max:
            return bounds
        if cap >= total_rank:
            return bounds  # complete enumeration; caller retries another prime
        cap += 1


def rank_expansion_exhaustive(m: RationalMatrix, k_max: int | None = None, budget: int | None = None,
                              factors: tuple[RationalMatrix, RationalMatrix] | None = None,
                              witnesses: Iterable[Sequence[int]] = ()) -> RankExpansionTable:
    """Exact ``sigma~(1..k_max)`` of ``m``.

    Args:
        m: the matrix.
        k_max: largest subset size of interest (default: all columns).
        budget: cap on extension attempts in the flat enumeration
            (default ``KRONBOUND_BUDGET`` or 10**7).
        factors: optional ``(A, B)`` with ``m == kron(A, B)``; used only to
            propose staircase-shaped witnesses that shorten the search.
        witnesses: extra 0-based column sets to try as upper-bound witnesses.

    Raises:
        BudgetExceeded: naming the largest ``k`` whose value was settled.
    """
    n = m.cols
    k_max = n if k_max is None else int(k_max)
    if not 0 <= k_max <= n:
        raise ValueError(f"k_max must lie in [0, {n}]")
    budget = default_budget() if budget is None else int(budget)
    if k_max == 0:
        return RankExpansionTable(n, ())
    wits = [tuple(w) for w in witnesses]
    if factors is not None:
        a, b = factors
        if kron(a, b) != m:
            raise ValueError("factors do not multiply to the given matrix")
        wits += kron_witness_sets(a, b)
    cols = m.columns()
    last = None
    for attempt, p in enumerate(PRIMES):
        bounds = _run(cols, k_max, budget, wits, p, seed=attempt)
        if bounds.settled() == k_max:
            return RankExpansionTable(n, tuple(bounds.lo))
        last = bounds
    raise OracleError(f"bounds did not meet: lower {last.lo}, upper {last.hi}")


def kruskal_rank(m: RationalMatrix, budget: int | None = None) -> int:
    """Largest ``k`` such that every ``k`` columns are independent."""
    rk = rank(m)
    k_max = min(m.cols, rk + 1)
    table = rank_expansion_exhaustive(m, k_max, budget)
    k = 0
    while k < len(table) and table[k + 1] == k + 1:
        k += 1
    return k


@dataclass(frozen=True)
class Certificate:
    valid: bool
    first_violation: tuple[int, int, float] | None
    table: RankExpansionTable

    def to_json_obj(self) -> dict:
        fv = None
        if self.first_violation:
            k, s, f = self.first_violation
            fv = {"k": k, "rank_expansion": s, "sigma": f}
        return {"valid": self.valid, "first_violation": fv, "values": self.table.as_list()}


def certify_lower_bound(f: SigmaFn, m: RationalMatrix, budget: int | None = None,
                        table: RankExpansionTable | None = None) -> Certificate:
    """Check ``f(k) <= sigma~(k)`` for every ``k`` in ``[1, cols]``."""
    if table is None:
        table = rank_expansion_exhaustive(m, m.cols, budget)
    for k in range(1, len(table) + 1):
        fk = f.eval(k)
        if not leq(fk, table[k]):
            return Certificate(False, (k, table[k], fk), table)
    return Certificate(True, None, table)


def rank_expansion_bruteforce(m: RationalMatrix, k_max: int | None = None) -> list[int]:
    """Plain subset enumeration with exact rank; only for tiny matrices."""
    cols = m.columns()
    k_max = m.cols if k_max is None else k_max
    return [min(rank_of_vectors([cols[i] for i in s]) for s in combinations(range(m.cols), k))
            for k in range(1, k_max + 1)]
