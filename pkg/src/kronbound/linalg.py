"""Exact rational dense matrices.

Entries are :class:`fractions.Fraction`, which is always reduced and keeps a
positive denominator, so it serves directly as the rational scalar type.
Rank is computed by fraction-free (Bareiss) elimination on an integer
rescaling of the rows.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction


class MatrixError(ValueError):
    """Raised on malformed matrices or invalid selections."""


def to_rational(x) -> Fraction:
    """Parse an int, Fraction or string like ``"3"`` / ``"-2/5"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise MatrixError(f"not a rational entry: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise MatrixError(f"bad rational entry {x!r}") from exc
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise MatrixError(f"non-finite entry {x!r}")
        return Fraction(x)
    try:
        # numpy integers and the like
        return Fraction(int(x))
    except (TypeError, ValueError) as exc:
        raise MatrixError(f"not a rational entry: {x!r}") from exc


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class RationalMatrix:
    """Immutable dense matrix over the rationals, stored row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise MatrixError(f"matrix must be at least 1x1, got {self.rows}x{self.cols}")
        if len(self.entries) != self.rows * self.cols:
            raise MatrixError("entries length does not match rows*cols")

    # construction
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> RationalMatrix:
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise MatrixError("empty matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise MatrixError("ragged rows")
        flat = tuple(to_rational(x) for r in rows for x in r)
        return cls(len(rows), width, flat)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> RationalMatrix:
        cols = [list(c) for c in cols]
        if not cols:
            raise MatrixError("empty matrix")
        return cls.from_rows(list(zip(*cols)))

    @classmethod
    def identity(cls, n: int) -> RationalMatrix:
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> RationalMatrix:
        return cls(r, c, (Fraction(0),) * (r * c))

    # access
    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple[Fraction, ...]:
        """0-based column ``j`` as a tuple."""
        return self.entries[j::self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def transpose(self) -> RationalMatrix:
        return RationalMatrix.from_rows(self.columns())

    def __matmul__(self, other: RationalMatrix) -> RationalMatrix:
        if self.cols != other.rows:
            raise MatrixError(f"shape mismatch {self.shape} @ {other.shape}")
        ocols = other.columns()
        out = [[sum((a * b for a, b in zip(self.row(i), oc)), Fraction(0)) for oc in ocols]
               for i in range(self.rows)]
        return RationalMatrix.from_rows(out)

    def apply(self, v: Sequence) -> list[Fraction]:
        """Matrix-vector product with a rational vector."""
        if len(v) != self.cols:
            raise MatrixError("vector length mismatch")
        v = [to_rational(x) for x in v]
        return [sum((a * b for a, b in zip(self.row(i), v)), Fraction(0)) for i in range(self.rows)]

    def inverse(self) -> RationalMatrix:
        """Exact inverse by Gauss-Jordan; raises on singular input."""
        n = self.rows
        if n != self.cols:
            raise MatrixError("inverse of a non-square matrix")
        aug = [list(self.row(i)) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for c in range(n):
            piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
            if piv is None:
                raise MatrixError("matrix is singular")
            aug[c], aug[piv] = aug[piv], aug[c]
            inv = 1 / aug[c][c]
            aug[c] = [x * inv for x in aug[c]]
            for r in range(n):
                if r != c and aug[r][c] != 0:
                    f = aug[r][c]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
        return RationalMatrix.from_rows([row[n:] for row in aug])

    def __repr__(self) -> str:
        body = "; ".join(" ".join(_fmt(x) for x in self.row(i)) for i in range(self.rows))
        return f"RationalMatrix({self.rows}x{self.cols}: [{body}])"

    # IO
    def to_json_obj(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[_fmt(x) for x in self.row(i)] for i in range(self.rows)]}

    @classmethod
    def from_json_obj(cls, obj: dict) -> RationalMatrix:
        try:
            r, c, ent = int(obj["rows"]), int(obj["cols"]), obj["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MatrixError(f"bad matrix JSON: {exc}") from exc
        m = cls.from_rows(ent)
        if m.shape != (r, c):
            raise MatrixError(f"declared shape {(r, c)} but entries give {m.shape}")
        return m

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for i in range(self.rows):
            w.writerow([_fmt(x) for x in self.row(i)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> RationalMatrix:
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(s.strip() for s in r)]
        return cls.from_rows(rows)


def load_matrix(path: str) -> RationalMatrix:
    """Read a matrix from a ``.json`` or ``.csv`` file."""
    with open(path) as fh:
        text = fh.read()
    if path.lower().endswith(".csv"):
        return RationalMatrix.from_csv(text)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixError(f"{path}: {exc}") from exc
    return RationalMatrix.from_json_obj(obj)


def _integer_rows(rows: Iterable[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for r in rows:
        den = lcm(*(x.denominator for x in r)) if r else 1
        out.append([int(x * den) for x in r])
    return out


def bareiss_rank_int(mat: list[list[int]]) -> int:
    """Rank of an integer matrix by Bareiss fraction-free elimination.

    ``mat`` is consumed (modified in place).
    """
    if not mat:
        return 0
    nr, nc = len(mat), len(mat[0])
    rank, prev = 0, 1
    for c in range(nc):
        piv = next((r for r in range(rank, nr) if mat[r][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        p = mat[rank][c]
        prow = mat[rank]
        for r in range(rank + 1, nr):
            row = mat[r]
            f = row[c]
            for j in range(c + 1, nc):
                row[j] = (p * row[j] - f * prow[j]) // prev
            row[c] = 0
        prev = p
        rank += 1
        if rank == nr:
            break
    return rank


def rank(m: RationalMatrix) -> int:
    """Exact rank."""
    return bareiss_rank_int(_integer_rows(m.to_rows()))


def rank_of_vectors(vectors: Sequence[Sequence[Fraction]]) -> int:
    """Exact rank of the span of the given vectors."""
    if not vectors:
        return 0
    return bareiss_rank_int(_integer_rows(vectors))


def kron(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    """Kronecker product; column ``i*n_B + j`` (0-based) is ``a_i (x) b_j``."""
    rows = []
    for ia in range(a.rows):
        ra = a.row(ia)
        for ib in range(b.rows):
            rb = b.row(ib)
            rows.append([x * y for x in ra for y in rb])
    return RationalMatrix.from_rows(rows)


@dataclass(frozen=True)
class ColumnSelection:
    """Strictly increasing 1-based column indices into a matrix with ``source_cols`` columns."""

    source_cols: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise MatrixError("column indices must be strictly increasing")
        if idx and (idx[0] < 1 or idx[-1] > self.source_cols):
            raise MatrixError(f"column index out of range [1, {self.source_cols}]")

    @classmethod
    def of(cls, source_cols: int, indices: Iterable[int]) -> ColumnSelection:
        return cls(source_cols, tuple(sorted(set(indices))))

    def __len__(self) -> int:
        return len(self.indices)


def select_columns(m: RationalMatrix, p: ColumnSelection) -> RationalMatrix:
    """Submatrix of the chosen columns in index order."""
    if p.source_cols != m.cols:
        raise MatrixError(f"selection is over {p.source_cols} columns, matrix has {m.cols}")
    if not p.indices:
        raise MatrixError("empty column selection")
    return RationalMatrix.from_columns([m.column(i - 1) for i in p.indices])


class EliminationState:
    """Growing echelon basis for incremental span tests.

    Each stored vector is normalized to have a leading 1 at its pivot and is
    reduced against the earlier ones, so a membership test is one pass of
    reductions.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._basis: list[tuple[int, list[Fraction]]] = []

    def __len__(self) -> int:
        return len(self._basis)

    @property
    def rank(self) -> int:
        return len(self._basis)

    def copy(self) -> EliminationState:
        st = EliminationState(self.dim)
        st._basis = list(self._basis)
        return st

    def _reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        w = [to_rational(x) for x in v]
        if len(w) != self.dim:
            raise MatrixError("vector dimension mismatch")
        for piv, b in self._basis:
            f = w[piv]
            if f:
                w = [x - f * y for x, y in zip(w, b)]
        return w

    def contains(self, v: Sequence[Fraction]) -> bool:
        return not any(self._reduce(v))

    def add(self, v: Sequence[Fraction]) -> bool:
        """Insert ``v``; returns False (and stores nothing) if it is already spanned."""
        w = self._reduce(v)
        piv = next((i for i, x in enumerate(w) if x), None)
        if piv is None:
            return False
        inv = 1 / w[piv]
        self._basis.append((piv, [x * inv for x in w]))
        return True
