from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kronbound.algorithms import moment_matrix, strassen, toom
from kronbound.linalg import RationalMatrix, kron
from kronbound.oracle import (BudgetExceeded, RankExpansionTable, certify_lower_bound, default_budget,
                              kruskal_rank, rank_expansion_exhaustive)
from kronbound.sigma import Monomial, from_spec

from conftest import brute_rank_expansion

LOG3_2 = math.log(2) / math.log(3)


@st.composite
def small_matrices(draw, max_rows=3, max_cols=7):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    pool = [draw(st.lists(st.integers(-2, 2), min_size=r, max_size=r)) for _ in range(draw(st.integers(1, c)))]
    cols = [draw(st.sampled_from(pool)) for _ in range(c)]
    return RationalMatrix.from_columns(cols)


def test_strassen_tables():
    alg = strassen()
    for m in (alg.a, alg.b, alg.c):
        assert rank_expansion_exhaustive(m).as_list() == [1, 2, 2, 3, 3, 4, 4]
        assert brute_rank_expansion(m) == [1, 2, 2, 3, 3, 4, 4]


def test_moment_matrix_and_identity():
    assert rank_expansion_exhaustive(moment_matrix()).as_list() == [1, 2, 3, 4, 4, 4, 4]
    assert rank_expansion_exhaustive(RationalMatrix.identity(5)).as_list() == [1, 2, 3, 4, 5]


@settings(max_examples=60)
@given(small_matrices())
def test_matches_brute_force(m):
    assert rank_expansion_exhaustive(m).as_list() == brute_rank_expansion(m)


@settings(max_examples=25)
@given(small_matrices(max_cols=6), st.randoms(use_true_random=False))
def test_permutation_invariant(m, rnd):
    cols = m.columns()
    rnd.shuffle(cols)
    assert rank_expansion_exhaustive(RationalMatrix.from_columns(cols)) == rank_expansion_exhaustive(m)


def test_partial_k_max():
    t = rank_expansion_exhaustive(strassen().a, k_max=3)
    assert t.as_list() == [1, 2, 2]
    with pytest.raises(ValueError):
        rank_expansion_exhaustive(strassen().a, k_max=8)


def test_kron_table_against_brute_force():
    a = toom(2).a
    c = kron(a, a)
    t = rank_expansion_exhaustive(c, factors=(a, a))
    assert t.as_list() == brute_rank_expansion(c)


def test_budget_exceeded_names_k():
    with pytest.raises(BudgetExceeded) as exc:
        rank_expansion_exhaustive(strassen().a, budget=10)
    assert 0 <= exc.value.k_reached < 7
    assert list(exc.value.partial) == [1, 2, 2, 3][:exc.value.k_reached]


def test_budget_env(monkeypatch):
    monkeypatch.setenv("KRONBOUND_BUDGET", "123")
    assert default_budget() == 123
    monkeypatch.setenv("KRONBOUND_BUDGET", "junk")
    assert default_budget() == 10_000_000


def test_table_invariants():
    with pytest.raises(ValueError):
        RankExpansionTable(3, (1, 3, 3))
    with pytest.raises(ValueError):
        RankExpansionTable(3, (2, 2, 2))
    with pytest.raises(ValueError):
        RankExpansionTable(3, (1, 2, 1))


def test_kruskal_rank():
    assert kruskal_rank(moment_matrix()) == 4
    assert kruskal_rank(RationalMatrix.identity(4)) == 4
    for k in (2, 3, 4):
        assert kruskal_rank(toom(k).a) == k


def test_certify_examples():
    a = strassen().a
    ok = certify_lower_bound(Monomial(1, LOG3_2, 1), a)
    assert ok.valid and ok.first_violation is None
    bad = certify_lower_bound(Monomial(1, 1, 1), a)
    assert not bad.valid
    assert bad.first_violation[:2] == (3, 2)
    assert certify_lower_bound(from_spec({"kind": "zero"}), a).valid
