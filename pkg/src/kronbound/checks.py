"""Property checks shared by the CLI demos: certified monomials and grid invariants."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .grid import (Grid, GridContext, basis_select, discrete_step, grid_expand, grid_rank, is_pre_cdg,
                   projections, to_cdg, vcollapse)
from .linalg import RationalMatrix, rank_of_vectors
from .oracle import RankExpansionTable
from .sigma import REL_SLACK, Monomial, SigmaFn
from .stair import Stair, expansion_size, merge

DEFAULT_QS = (1.0, 0.9, 0.8, 0.75, 0.7, 0.6, 0.5, 0.4, 0.3, 0.25, 0.2)


def monomial_under(table: RankExpansionTable | Sequence[int], q: float, n: int | None = None) -> Monomial:
    """Largest ``(k/k0)^q`` lying under the table at every ``k``.

    Raises:
        ValueError: if some ``sigma~(k)`` is 0 (a zero column).
    """
    vals = list(table.values if isinstance(table, RankExpansionTable) else table)
    if not vals or min(vals) <= 0:
        raise ValueError("table has a zero entry; no positive monomial fits under it")
    k0 = max(k / v ** (1.0 / q) for k, v in enumerate(vals, start=1))
    k0 *= 1 + 1e-12
    return Monomial(1, q, k0, n=len(vals) if n is None else n)


def best_monomial_under(table, qs: Sequence[float] = DEFAULT_QS, n: int | None = None) -> Monomial:
    """The candidate from :func:`monomial_under` with the largest value at ``n``."""
    cands = [monomial_under(table, q, n) for q in qs]
    top = float(len(table) if n is None else n)
    return max(cands, key=lambda s: s.eval(top))


def random_matrix(rng: np.random.Generator, rows: int, cols: int, lo: int = -2, hi: int = 2,
                  rational: bool = False) -> RationalMatrix:
    """Small-entry matrix with no zero column; columns sometimes repeat up to scale."""
    from fractions import Fraction
    out = []
    for _ in range(cols):
        if out and rng.random() < 0.25:
            base = out[int(rng.integers(len(out)))]
            s = int(rng.choice([-2, -1, 1, 2]))
            out.append([x * s for x in base])
            continue
        while True:
            col = [int(x) for x in rng.integers(lo, hi + 1, rows)]
            if any(col):
                break
        if rational:
            col = [Fraction(x, int(rng.integers(1, 4))) for x in col]
        out.append(col)
    return RationalMatrix.from_columns(out)


def random_grid(rng: np.random.Generator, n_a: int, n_b: int) -> Grid:
    p = rng.uniform(0.15, 0.85)
    pts = [(i, j) for i in range(1, n_a + 1) for j in range(1, n_b + 1) if rng.random() < p]
    if not pts:
        pts = [(int(rng.integers(1, n_a + 1)), int(rng.integers(1, n_b + 1)))]
    return Grid.of(n_a, n_b, pts)


def _span_rank(vecs) -> int:
    return rank_of_vectors(vecs) if vecs else 0


def cdg_basis_clauses(d: Grid, ctx: GridContext) -> dict[str, bool]:
    """The five structural clauses of the basis of a CDG ``d``."""
    b = basis_select(d, ctx)
    xs, ys = projections(b)
    a_cols = [ctx.a.column(i - 1) for i in range(1, ctx.n_a + 1)]
    b_cols = [ctx.b.column(j - 1) for j in range(1, ctx.n_b + 1)]

    def new(vecs, idx, pool):
        before = [vecs[k - 1] for k in sorted(pool) if k < idx]
        return _span_rank(before + [vecs[idx - 1]]) > _span_rank(before)

    c1 = all(((1, j) in b) == new(b_cols, j, ys) for j in d.column(1))
    c2 = all(((i, 1) in b) == new(a_cols, i, xs) for i in d.row(1))
    c3 = b.points == frozenset(p for p in d.points if p[0] in xs and p[1] in ys)
    c4 = all(_span_rank([ctx.vector(p, j) for j in b.column(p)]) ==
             _span_rank([ctx.vector(p, j) for j in d.column(p)]) for p in xs)
    c5 = all(_span_rank([ctx.vector(i, q) for i in b.row(q)]) ==
             _span_rank([ctx.vector(i, q) for i in d.row(q)]) for q in ys)
    return {"first_column": c1, "first_row": c2, "product_form": c3, "columns_span": c4, "rows_span": c5}


def cdg_stair(s: Grid) -> Stair | None:
    cdg, _, _ = to_cdg(s)
    h = [x for x in cdg.heights() if x > 0]
    return Stair.from_heights(h) if h else None


def grid_checks(g: Grid, ctx: GridContext, sa: SigmaFn, sb: SigmaFn) -> dict:
    """Evaluate the grid invariants on one instance; ``ok`` is their conjunction."""
    rk = grid_rank(g, ctx)
    basis = basis_select(g, ctx)
    out: dict = {"grid": g.to_json_obj(), "rank": rk, "basis_size": len(basis)}
    checks: dict[str, bool] = {"basis_size_is_rank": len(basis) == rk}
    d, perm, _ = to_cdg(vcollapse(g))
    clauses = cdg_basis_clauses(d, ctx.permute_a(perm))
    checks.update({f"cdg_{k}": v for k, v in clauses.items()})
    s = discrete_step(g, ctx)
    exp = grid_expand(s, sa, sb)
    out.update({"step": s.to_json_obj(), "expanded_size": len(exp)})
    checks["step_is_pre_cdg"] = is_pre_cdg(s)
    checks["step_size_le_rank"] = len(s) <= rk
    checks["grid_le_expansion"] = len(g) <= len(exp)
    st = cdg_stair(s)
    f, gg = sa.pseudoinverse, sb.pseudoinverse
    if st is not None:
        size = expansion_size(st, f, gg)
        out["expansion_size"] = size if math.isfinite(size) else "inf"
        checks["expand_le_size"] = len(exp) <= size * (1 + REL_SLACK)
        ok_merge = True
        for k in range(1, len(st)):
            m = merge(st, k, f, gg)
            ok_merge &= expansion_size(m, f, gg) >= size * (1 - REL_SLACK)
        checks["merge_monotone"] = ok_merge
    out["checks"] = checks
    out["ok"] = all(checks.values())
    return out
