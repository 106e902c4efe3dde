from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kronbound.commbounds import (LOG3_2, CommBoundError, ExpansionBound, ProblemShape, conv_parallel_closed,
                                  conv_sequential_closed, conv_shape, emax, parallel_bound, sequential_bound,
                                  strassen_parallel_closed, strassen_sequential_closed, strassen_shape)
from kronbound.sigma import ClampedLinear, Monomial


def strassen_eb():
    m = Monomial(1, LOG3_2, 1)
    return ExpansionBound(m, m, m)


def toom_eb(n):
    m = Monomial(1, math.log(n) / math.log(2 * n - 1), 1)
    return ExpansionBound(m, m, None)


def test_emax_diagonal_examples():
    # k^{log_3 2} inverts to y^{log_2 3}
    assert emax(strassen_eb(), 4) == pytest.approx(4 ** math.log2(3), rel=1e-12)
    for n in (2, 3, 4):
        assert emax(toom_eb(n), 5) == pytest.approx(5 ** (math.log(2 * n - 1) / math.log(n)), rel=1e-12)
    assert emax(ExpansionBound(), 3) == math.inf
    with pytest.raises(CommBoundError):
        emax(strassen_eb(), 0.5)
    with pytest.raises(CommBoundError):
        emax(strassen_eb(), 2, "corner")


def test_emax_simplex():
    # symmetric operands: simplex optimum is the diagonal
    assert emax(strassen_eb(), 4, "simplex") == pytest.approx(emax(strassen_eb(), 4), rel=1e-9)
    # two operands: all 3M can go to A and B, so the simplex value is larger
    assert emax(toom_eb(3), 4, "simplex") > emax(toom_eb(3), 4)
    q = math.log(3) / math.log(5)
    assert emax(toom_eb(3), 4, "simplex") == pytest.approx(6 ** (1 / q), rel=1e-9)
    assert emax(ExpansionBound(ClampedLinear(2)), 4, "simplex") == math.inf


def test_toom3_sequential_example():
    shape = ProblemShape(5, 3, 3, 5)
    rep = sequential_bound(toom_eb(3), shape, 1)
    assert rep.value == 11
    assert rep.intermediates["expansion_term"] == pytest.approx(10)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
@pytest.mark.parametrize("M", [2, 4, 8])
def test_strassen_sequential_closed(n, M):
    rep = sequential_bound(strassen_eb(), strassen_shape(n), M)
    assert rep.value == pytest.approx(strassen_sequential_closed(n, M), rel=1e-9)
    # independent form: 2 n^{log2 7} / M^{log2 3 - 1}
    assert rep.intermediates["expansion_term"] == pytest.approx(2 * 7 ** math.log2(n) / M ** (math.log2(3) - 1),
                                                                rel=1e-9)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
@pytest.mark.parametrize("P", [2, 7, 49])
def test_strassen_parallel_closed(n, P):
    rep = parallel_bound(strassen_eb(), strassen_shape(n), P)
    assert rep.intermediates["unclamped_total"] == pytest.approx(strassen_parallel_closed(n, P), rel=1e-9)
    assert rep.value == pytest.approx(max(0.0, strassen_parallel_closed(n, P)), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("M", [2, 4, 8])
def test_conv_sequential_closed(n, d, M):
    rep = sequential_bound(toom_eb(n), conv_shape(n, d), M)
    assert rep.value == pytest.approx(conv_sequential_closed(n, d, M), rel=1e-9)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("P", [2, 7, 49])
def test_conv_parallel_closed(n, d, P):
    rep = parallel_bound(toom_eb(n), conv_shape(n, d), P)
    q = math.log(n) / math.log(2 * n - 1)
    # sigma((2n-1)^d / P) = n^d / P^q since ((2n-1)^q) = n
    assert rep.intermediates["unclamped_total"] == pytest.approx(conv_parallel_closed(n, d, P), rel=1e-9)
    assert rep.intermediates["unclamped_total"] == pytest.approx(2 * (n ** d / P ** q - n ** d / P), rel=1e-9)


@given(st.integers(1, 6), st.floats(1, 200))
def test_parallel_residual_nonnegative(log_n, P):
    rep = parallel_bound(strassen_eb(), strassen_shape(2 ** log_n), P)
    assert rep.value >= 0
    assert rep.intermediates["residual"] >= -1e-9 * strassen_shape(2 ** log_n).R


def test_parallel_clamp_flag():
    rep = parallel_bound(strassen_eb(), strassen_shape(16), 2)
    assert rep.intermediates["clamped"] == ["A", "B", "C"]
    assert rep.value == 0.0


def test_report_json():
    obj = sequential_bound(ExpansionBound(), ProblemShape(8, 1, 1, 1), 2).to_json_obj()
    assert obj["intermediates"]["emax"] == "inf"
    assert set(obj) == {"mode", "value", "intermediates"}
    with pytest.raises(CommBoundError):
        ProblemShape(0, 1, 1, 1)
