from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kronbound.algorithms import strassen
from kronbound.linalg import (ColumnSelection, EliminationState, MatrixError, RationalMatrix, kron, rank,
                              rank_of_vectors, select_columns, to_rational)

from conftest import sympy_rank

small = st.integers(-3, 3)
rationals = st.fractions(min_value=-4, max_value=4, max_denominator=5)


@st.composite
def matrices(draw, max_rows=4, max_cols=5, elems=rationals):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return RationalMatrix.from_rows([[draw(elems) for _ in range(c)] for _ in range(r)])


def test_rank_examples():
    assert rank(RationalMatrix.identity(4)) == 4
    assert rank(strassen().a) == 4
    assert rank(RationalMatrix.zeros(3, 3)) == 0


@given(matrices())
def test_rank_matches_sympy(m):
    assert rank(m) == sympy_rank(m.to_rows())


@given(matrices(max_rows=6, max_cols=6, elems=st.integers(-10**12, 10**12)))
def test_rank_big_integers(m):
    assert rank(m) == sympy_rank(m.to_rows())


def test_rational_is_reduced():
    q = to_rational("-6/4")
    assert (q.numerator, q.denominator) == (-3, 2)
    with pytest.raises(MatrixError):
        to_rational("1/0")
    with pytest.raises(MatrixError):
        to_rational(float("nan"))


def test_kron_examples():
    assert kron(RationalMatrix.identity(2), RationalMatrix.identity(3)) == RationalMatrix.identity(6)
    a, b = RationalMatrix.zeros(2, 3), RationalMatrix.zeros(4, 5)
    assert kron(a, b).shape == (8, 15)


@given(matrices(max_rows=3, max_cols=3, elems=small), matrices(max_rows=3, max_cols=3, elems=small))
def test_kron_matches_numpy_and_column_layout(a, b):
    c = kron(a, b)
    ref = np.kron(np.array(a.to_rows(), dtype=object), np.array(b.to_rows(), dtype=object))
    assert c.to_rows() == ref.tolist()
    for i in range(a.cols):
        for j in range(b.cols):
            col = c.column(i * b.cols + j)
            assert list(col) == [x * y for x in a.column(i) for y in b.column(j)]


@given(matrices(max_rows=3, max_cols=4), matrices(max_rows=3, max_cols=4))
def test_kron_rank_multiplies(a, b):
    assert rank(kron(a, b)) == rank(a) * rank(b)


def test_select_columns():
    i3 = RationalMatrix.identity(3)
    assert select_columns(i3, ColumnSelection.of(3, [1, 2])).to_rows() == [[1, 0], [0, 1], [0, 0]]
    assert select_columns(i3, ColumnSelection.of(3, [1, 2, 3])) == i3
    assert rank(select_columns(strassen().a, ColumnSelection.of(7, [5, 6, 7]))) == 3
    with pytest.raises(MatrixError):
        ColumnSelection(3, (0, 1))
    with pytest.raises(MatrixError):
        ColumnSelection(3, (2, 2))
    with pytest.raises(MatrixError):
        select_columns(i3, ColumnSelection.of(4, [4]))


@given(matrices(), st.data())
def test_selection_rank_bound(m, data):
    idx = data.draw(st.sets(st.integers(1, m.cols), min_size=1))
    sub = select_columns(m, ColumnSelection.of(m.cols, idx))
    assert rank(sub) <= min(len(idx), rank(m))


@given(matrices(max_rows=4, max_cols=6))
def test_elimination_state_tracks_rank(m):
    st_ = EliminationState(m.rows)
    for j, col in enumerate(m.columns(), start=1):
        before = st_.rank
        added = st_.add(col)
        assert st_.contains(col)
        assert st_.rank == before + int(added)
        assert st_.rank == sympy_rank([list(r) for r in zip(*m.columns()[:j])])


def test_inverse_and_matmul():
    m = RationalMatrix.from_rows([[2, 1], [5, 3]])
    assert m @ m.inverse() == RationalMatrix.identity(2)
    with pytest.raises(MatrixError):
        RationalMatrix.from_rows([[1, 2], [2, 4]]).inverse()


@given(matrices())
def test_json_and_csv_roundtrip(m):
    assert RationalMatrix.from_json_obj(m.to_json_obj()) == m
    assert RationalMatrix.from_csv(m.to_csv()) == m


def test_json_format():
    obj = RationalMatrix.from_rows([[Fraction(1, 2), 3]]).to_json_obj()
    assert obj == {"rows": 1, "cols": 2, "entries": [["1/2", "3"]]}
    with pytest.raises(MatrixError):
        RationalMatrix.from_json_obj({"rows": 2, "cols": 2, "entries": [["1", "2"]]})


def test_rank_of_vectors_empty_dimension():
    assert rank_of_vectors([[0, 0], [0, 0]]) == 0
