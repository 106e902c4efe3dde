"""Built-in bilinear algorithms and symmetric-contraction bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .linalg import RationalMatrix, kron, rank, to_rational
from .sigma import Monomial, SigmaFn

MAX_NEST_ENTRIES = 4_000_000


class AlgorithmError(ValueError):
    pass


@dataclass(frozen=True)
class BilinearAlgorithm:
    """``z = C[(A^T x) * (B^T y)]`` with ``R`` columns in each matrix."""

    a: RationalMatrix
    b: RationalMatrix
    c: RationalMatrix
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    check_rank: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if not (self.a.cols == self.b.cols == self.c.cols):
            raise AlgorithmError(f"column counts differ: {self.a.cols}, {self.b.cols}, {self.c.cols}")
        if self.check_rank:
            for lab, m in zip("abc", (self.a, self.b, self.c)):
                if rank(m) != min(m.rows, m.cols):
                    raise AlgorithmError(f"matrix {lab} ({m.rows}x{m.cols}) is not full rank")

    @property
    def R(self) -> int:
        return self.a.cols

    @property
    def sizes(self) -> tuple[int, int, int]:
        """``(m_A, m_B, m_C)``."""
        return self.a.rows, self.b.rows, self.c.rows

    def evaluate(self, x: Sequence, y: Sequence) -> list[Fraction]:
        """Run the algorithm on exact inputs."""
        if len(x) != self.a.rows or len(y) != self.b.rows:
            raise AlgorithmError(f"inputs must have lengths {self.a.rows} and {self.b.rows}")
        u = self.a.transpose().apply([to_rational(v) for v in x])
        w = self.b.transpose().apply([to_rational(v) for v in y])
        return self.c.apply([p * q for p, q in zip(u, w)])

    def to_json_obj(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "R": self.R,
                "a": self.a.to_json_obj(), "b": self.b.to_json_obj(), "c": self.c.to_json_obj()}


_STRASSEN_A = [[1, 0, 1, 0, 1, -1, 0], [0, 0, 0, 0, 1, 0, 1],
               [0, 1, 0, 0, 0, 1, 0], [1, 1, 0, 1, 0, 0, 1]]
_STRASSEN_B = [[1, 1, 0, -1, 0, 1, 0], [0, 0, 1, 0, 0, 1, 0],
               [0, 0, 0, 1, 0, 0, 1], [1, 0, -1, 0, 1, 0, 1]]
_STRASSEN_C = [[1, 0, 0, 1, -1, 0, 1], [0, 0, 1, 0, 1, 0, 0],
               [0, 1, 0, 1, 0, 0, 0], [1, -1, 1, 0, 0, 1, 0]]


def strassen(corrected: bool = False) -> BilinearAlgorithm:
    """Strassen's 2x2 algorithm; inputs and output are row-major ``vec`` of 2x2 matrices.

    The default triple has ``A[4,7] = +1`` as commonly printed, which does not
    compute the product (``M7`` needs ``A12 - A22``).  ``corrected=True``
    flips that sign.  Both ``A`` variants have the same rank expansion.
    """
    a = [row[:] for row in _STRASSEN_A]
    if corrected:
        a[3][6] = -1
    return BilinearAlgorithm(RationalMatrix.from_rows(a), RationalMatrix.from_rows(_STRASSEN_B),
                             RationalMatrix.from_rows(_STRASSEN_C), "strassen",
                             {"corrected": corrected})


def moment_matrix() -> RationalMatrix:
    """4x7 matrix ``[I | (1, x, x^2, x^3)^T for x = 1, 2, 3]`` of rank and Kruskal rank 4."""
    return RationalMatrix.from_rows([[1, 0, 0, 0, 1, 1, 1], [0, 1, 0, 0, 1, 2, 3],
                                     [0, 0, 1, 0, 1, 4, 9], [0, 0, 0, 1, 1, 8, 27]])


def default_nodes(count: int) -> list[Fraction]:
    """``0, 1, -1, 2, -2, ...``."""
    out = [Fraction(0)]
    i = 1
    while len(out) < count:
        out.append(Fraction(i))
        if len(out) < count:
            out.append(Fraction(-i))
        i += 1
    return out


def vandermonde(nodes: Sequence, cols: int) -> RationalMatrix:
    """``[V]_{ij} = x_i^(j-1)``."""
    return RationalMatrix.from_rows([[to_rational(x) ** j for j in range(cols)] for x in nodes])


def toom(k: int, nodes: Sequence | None = None) -> BilinearAlgorithm:
    """Toom-k: evaluate at ``2k-1`` nodes, multiply pointwise, interpolate.

    Inputs are coefficient vectors of two polynomials of degree ``k-1``.
    """
    if k < 2:
        raise AlgorithmError(f"toom needs k >= 2, got {k}")
    m = 2 * k - 1
    xs = default_nodes(m) if nodes is None else [to_rational(x) for x in nodes]
    if len(xs) != m:
        raise AlgorithmError(f"toom-{k} needs exactly {m} nodes, got {len(xs)}")
    if len(set(xs)) != m:
        raise AlgorithmError(f"toom nodes must be distinct: {[str(x) for x in xs]}")
    a = vandermonde(xs, k).transpose()
    c = vandermonde(xs, m).inverse()
    return BilinearAlgorithm(a, a, c, f"toom{k}", {"k": k, "nodes": [str(x) for x in xs]})


def _kron_power(m: RationalMatrix, tau: int) -> RationalMatrix:
    out = m
    for _ in range(tau - 1):
        out = kron(out, m)
    return out


def nest(alg: BilinearAlgorithm, tau: int, max_entries: int = MAX_NEST_ENTRIES) -> BilinearAlgorithm:
    """``tau``-fold Kronecker power of each of ``A``, ``B``, ``C``."""
    if tau < 1:
        raise AlgorithmError(f"nest needs tau >= 1, got {tau}")
    if tau == 1:
        return alg
    dims = [(m.rows ** tau, m.cols ** tau) for m in (alg.a, alg.b, alg.c)]
    if any(r * c > max_entries for r, c in dims):
        shown = ", ".join(f"{r}x{c}" for r, c in dims)
        raise AlgorithmError(f"nest({alg.name}, {tau}) would build matrices {shown}; ceiling is {max_entries} entries")
    mats = [_kron_power(m, tau) for m in (alg.a, alg.b, alg.c)]
    # Kronecker products of full-rank matrices are full rank
    return BilinearAlgorithm(*mats, name=f"{alg.name}^{tau}", params={**alg.params, "tau": tau},
                             check_rank=False)


def poly_mul(x: Sequence, y: Sequence) -> list[Fraction]:
    """Coefficients of the product of two polynomials."""
    out = [Fraction(0)] * (len(x) + len(y) - 1)
    for i, a in enumerate(x):
        for j, b in enumerate(y):
            out[i + j] += to_rational(a) * to_rational(b)
    return out


def conv_nd(x: Sequence, y: Sequence, n: int, d: int) -> list[Fraction]:
    """Full ``d``-dimensional convolution of two row-major ``n^d`` arrays; output is ``(2n-1)^d``."""
    m = 2 * n - 1
    out = [Fraction(0)] * m ** d

    def digits(i, base):
        ds = []
        for _ in range(d):
            ds.append(i % base)
            i //= base
        return ds[::-1]

    for i, a in enumerate(x):
        if not a:
            continue
        di = digits(i, n)
        for j, b in enumerate(y):
            dj = digits(j, n)
            idx = 0
            for p, q in zip(di, dj):
                idx = idx * m + p + q
            out[idx] += to_rational(a) * to_rational(b)
    return out


# symmetry-preserving contractions, represented by their sigma triples

class NoBound:
    """Marks an operand for which no rank-expansion bound is available; falsy."""

    def __init__(self, reason: str):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NoBound({self.reason!r})"

    def __eq__(self, other):
        return isinstance(other, NoBound) and other.reason == self.reason


@dataclass(frozen=True)
class SymContractionSpec:
    """Contraction of tensors of orders ``s+v`` and ``v+t`` over ``v`` indices, each mode of size ``n``."""

    s: int
    t: int
    v: int
    n: int = 2

    def __post_init__(self):
        if min(self.s, self.t, self.v) < 0:
            raise AlgorithmError("orders must be nonnegative")
        if self.omega < 1:
            raise AlgorithmError("need s + t + v >= 1")
        if self.n < 1:
            raise AlgorithmError("mode dimension must be positive")

    @property
    def omega(self) -> int:
        return self.s + self.t + self.v

    @property
    def exponents(self) -> tuple[Fraction, Fraction, Fraction]:
        w = self.omega
        return Fraction(self.s + self.v, w), Fraction(self.v + self.t, w), Fraction(self.s + self.t, w)

    @property
    def binomials(self) -> tuple[int, int, int]:
        w = self.omega
        return math.comb(w, self.t), math.comb(w, self.s), math.comb(w, self.v)


SigmaOrNone = SigmaFn | NoBound


def _mono(pref: Fraction, q: Fraction, n) -> SigmaOrNone:
    if q == 0:
        return NoBound("exponent is 0: the encoding matrix has a single row")
    return Monomial(pref, q, 1, n=n)


def sym_sigma(spec: SymContractionSpec) -> tuple[SigmaOrNone, SigmaOrNone, SigmaOrNone]:
    """``(sigma_A, sigma_B, sigma_C)`` with ``sigma_X(k) = k^{q_X} / binom``."""
    n = spec.n ** spec.omega
    return tuple(_mono(Fraction(1, c), q, n) for q, c in zip(spec.exponents, spec.binomials))


def sym_nested_sigma(spec1: SymContractionSpec, spec2: SymContractionSpec,
                     second_nonsymmetric: bool = False) -> tuple[SigmaOrNone, SigmaOrNone, SigmaOrNone]:
    """Sigma triple for ``(A (x) U, B (x) V, C (x) W)``.

    With two symmetry-preserving factors the prefactors multiply and the
    exponent is the smaller one.  With a nonsymmetric second factor an
    operand keeps the symmetric factor's bound when the matching order of
    the second contraction is zero (``t'`` for ``A``, ``s'`` for ``B``,
    ``v'`` for ``C``); otherwise it gets :class:`NoBound`.
    """
    n = spec1.n ** spec1.omega * spec2.n ** spec2.omega
    first = sym_sigma(spec1)
    if second_nonsymmetric:
        out = []
        for lab, zero_order, name, s1 in zip("ABC", (spec2.t, spec2.s, spec2.v), ("t'", "s'", "v'"), first):
            if zero_order != 0:
                out.append(NoBound(f"{lab}: needs {name} = 0 in the nonsymmetric factor"))
            elif not s1:
                out.append(s1)
            else:
                out.append(Monomial(s1.a, s1.q, 1, n=n))
        return tuple(out)
    out = []
    for q1, q2, c1, c2 in zip(spec1.exponents, spec2.exponents, spec1.binomials, spec2.binomials):
        out.append(_mono(Fraction(1, c1 * c2), min(q1, q2), n))
    return tuple(out)
