from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kronbound.algorithms import moment_matrix
from kronbound.checks import cdg_basis_clauses, random_matrix
from kronbound.grid import (Grid, GridContext, GridError, basis_select, discrete_step, grid_expand,
                            grid_from_selection, grid_rank, is_pre_cdg, projections, to_cdg, vcollapse)
from kronbound.linalg import ColumnSelection, RationalMatrix, kron, select_columns
from kronbound.oracle import rank_expansion_exhaustive
from kronbound.sigma import ClampedLinear, Monomial, PiecewiseClosedForm

from conftest import sympy_rank_cols

IDENT = Monomial(1, 1, 1)


def ctx_3x3(seed):
    rng = np.random.default_rng(seed)
    return GridContext(random_matrix(rng, 2 + seed % 2, 3), random_matrix(rng, 3, 3))


@st.composite
def grids(draw, n_a=3, n_b=3, max_size=None):
    pts = draw(st.sets(st.tuples(st.integers(1, n_a), st.integers(1, n_b)), min_size=1, max_size=max_size))
    return Grid.of(n_a, n_b, pts)


def test_grid_from_selection_examples():
    g = grid_from_selection(ColumnSelection.of(12, [1, 2, 6, 12]), 3, 4)
    assert g.points == {(1, 1), (1, 2), (2, 2), (3, 4)}
    assert len(grid_from_selection(ColumnSelection.of(12, range(1, 13)), 3, 4)) == 12
    assert grid_from_selection(ColumnSelection.of(12, [1]), 3, 4).points == {(1, 1)}


def test_grid_columns_match_kron():
    rng = np.random.default_rng(3)
    a, b = random_matrix(rng, 2, 3), random_matrix(rng, 3, 4)
    c = kron(a, b)
    sel = ColumnSelection.of(12, [1, 5, 7, 12])
    g = grid_from_selection(sel, 3, 4)
    assert g.column_indices() == list(sel.indices)
    assert [list(v) for v in g.vectors(GridContext(a, b))] == [list(x) for x in select_columns(c, sel).columns()]


def test_projections():
    g = Grid.of(7, 4, [(1, 1), (2, 3), (4, 4), (5, 1), (7, 3)])
    assert projections(g) == ({1, 2, 4, 5, 7}, {1, 3, 4})
    assert projections(Grid.of(2, 2, [])) == (set(), set())
    assert projections(Grid.from_heights(2, 3, [3, 3])) == ({1, 2}, {1, 2, 3})


def test_vcollapse():
    g = Grid.of(2, 4, [(1, 2), (1, 4), (2, 3)])
    assert vcollapse(g).points == {(1, 1), (1, 2), (2, 1)}
    d = Grid.from_heights(3, 3, [2, 3, 1])
    assert vcollapse(d) == d


@given(grids(4, 4))
def test_vcollapse_keeps_count_and_projection(g):
    v = vcollapse(g)
    assert len(v) == len(g) and projections(v)[0] == projections(g)[0] and v.is_dense()


def test_to_cdg():
    cdg, perm, _ = to_cdg(Grid.from_heights(3, 3, [1, 3, 2]))
    assert cdg.heights() == [3, 2, 1] and perm == [2, 3, 1]
    d = Grid.from_heights(3, 3, [3, 2, 2])
    out, perm, rows = to_cdg(d)
    assert out == d and perm == [1, 2, 3] and rows == [1, 2, 3]
    # pre-CDG needing a row swap
    pre = Grid.of(2, 2, [(1, 2), (2, 2), (1, 1)])
    assert to_cdg(pre)[0].heights() == [2, 1]
    with pytest.raises(GridError):
        to_cdg(Grid.of(2, 2, [(1, 1), (2, 2)]))
    assert not is_pre_cdg(Grid.of(2, 2, [(1, 1), (2, 2)]))


def test_grid_expand_examples():
    s = Grid.from_heights(3, 3, [3, 1, 1])
    assert grid_expand(s, IDENT, IDENT) == s
    const5 = PiecewiseClosedForm([(1, "affine", {"m": 0, "c": 0})])  # sigma = 0: pseudoinverse is infinite
    single = Grid.of(2, 4, [(1, 1)])
    assert grid_expand(single, ClampedLinear(1), const5).heights() == [4, 4]


def test_grid_expand_staircase_counts():
    # floor(f(1)) = 1, floor(f(2)) = 3, floor(f(3)) = 4 for f = sigma^dagger
    sig = PiecewiseClosedForm.from_table([(1, 1), (3, 2), (4, 3), (8, 4)])
    s = Grid.from_heights(4, 6, [3, 2, 1])
    v_heights = [4, 3, 1, 0]
    h_widths = [3, 2, 2, 1]
    from kronbound.grid import hexp, vexp
    v = vexp(s, sig)
    assert v.heights() == v_heights
    assert len(v) - len(s) == 2
    e = hexp(v, sig)
    assert e.widths()[:4] == [4, 3, 3, 1]
    assert len(e) - len(v) == 3
    assert e == grid_expand(s, sig, sig)
    assert v.widths()[:4] == h_widths


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.data())
def test_grid_expand_monotone(seed, data):
    rng = np.random.default_rng(seed)
    hs = sorted(rng.integers(0, 5, 4).tolist(), reverse=True)
    small = [data.draw(st.integers(0, h)) for h in hs]
    small = sorted(small, reverse=True)
    small = [min(a, b) for a, b in zip(small, hs)]
    sa, sb = Monomial(1, rng.uniform(0.3, 1), 1), Monomial(1, rng.uniform(0.3, 1), 1)
    big, little = Grid.from_heights(4, 4, hs), Grid.from_heights(4, 4, small)
    assert len(grid_expand(little, sa, sb)) <= len(grid_expand(big, sa, sb))


@settings(max_examples=80)
@given(st.integers(0, 50), grids(3, 3, max_size=10))
def test_basis_size_is_rank(seed, g):
    ctx = ctx_3x3(seed)
    b = basis_select(g, ctx)
    assert b.points <= g.points
    assert len(b) == sympy_rank_cols(g.vectors(ctx)) == grid_rank(g, ctx)
    assert sympy_rank_cols(b.vectors(ctx)) == len(b)


def test_basis_full_kruskal_cdg():
    i3 = RationalMatrix.identity(3)
    ctx = GridContext(i3, i3)
    d = Grid.from_heights(3, 3, [3, 2, 1])
    assert basis_select(d, ctx) == d
    assert basis_select(Grid.of(3, 3, [(2, 2)]), ctx).points == {(2, 2)}


def test_cdg_basis_on_moment_matrix():
    m = moment_matrix()
    ctx = GridContext(m, m)
    for hs in ([7, 7, 5, 4, 4, 2, 1], [6, 6, 6, 6, 6], [7, 1, 1, 1, 1, 1, 1]):
        d = Grid.from_heights(7, 7, hs)
        assert all(cdg_basis_clauses(d, ctx).values())


@settings(max_examples=60)
@given(st.integers(0, 50), st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_cdg_basis_clauses_random(seed, hs):
    hs = sorted(hs, reverse=True)
    if not any(hs):
        hs[0] = 1
    assert all(cdg_basis_clauses(Grid.from_heights(3, 3, hs), ctx_3x3(seed)).values())


def test_discrete_step_examples():
    i3 = RationalMatrix.identity(3)
    ctx = GridContext(i3, i3)
    full = Grid.from_heights(3, 3, [3, 3, 3])
    assert len(discrete_step(full, ctx)) == grid_rank(full, ctx) == 9
    b = RationalMatrix.from_columns([[1, 0], [2, 0], [0, 1]])
    ctx2 = GridContext(i3, b)
    col = Grid.of(3, 3, [(2, 1), (2, 2), (2, 3)])
    s = discrete_step(col, ctx2)
    assert s.heights() == [0, 2, 0]


def _exact_sigma(m):
    t = rank_expansion_exhaustive(m).as_list()
    return PiecewiseClosedForm.from_table([(k, v) for k, v in enumerate(t, start=1)], n=len(t))


@settings(max_examples=80)
@given(st.integers(0, 10**6))
def test_discrete_step_inequalities(seed):
    rng = np.random.default_rng(seed)
    na, nb = 3, int(rng.integers(3, 5))
    a, b = random_matrix(rng, int(rng.integers(2, 4)), na), random_matrix(rng, int(rng.integers(2, 4)), nb)
    ctx = GridContext(a, b)
    pts = [(i, j) for i in range(1, na + 1) for j in range(1, nb + 1) if rng.random() < 0.5] or [(1, 1)]
    g = Grid.of(na, nb, pts)
    s = discrete_step(g, ctx)
    assert is_pre_cdg(s)
    assert len(s) <= sympy_rank_cols(g.vectors(ctx))
    # the exact rank expansions are the tightest valid sigmas
    assert len(g) <= len(grid_expand(s, _exact_sigma(a), _exact_sigma(b)))


def test_exhaustive_small_grids_rank():
    ctx = ctx_3x3(1)
    cells = [(i, j) for i in range(1, 4) for j in range(1, 4)]
    for size in (1, 2, 4):
        for pts in list(combinations(cells, size))[:40]:
            g = Grid.of(3, 3, pts)
            assert len(basis_select(g, ctx)) == sympy_rank_cols(g.vectors(ctx))


def test_grid_json_roundtrip():
    g = Grid.of(3, 4, [(1, 1), (3, 4)])
    assert Grid.from_json_obj(g.to_json_obj()) == g
    with pytest.raises(GridError):
        Grid.of(2, 2, [(3, 1)])
    with pytest.raises(GridError):
        Grid.from_json_obj({"nA": 2})
