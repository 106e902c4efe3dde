"""Grid representation of column subsets of ``A (x) B``.

A point ``(i, j)`` (1-based, Cartesian: ``i`` indexes columns of ``A`` on the
x-axis, ``j`` columns of ``B`` on the y-axis) stands for ``a_i (x) b_j``.
Grid "column" ``i`` is ``G_[i,.]`` and grid "row" ``j`` is ``G_[.,j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .linalg import ColumnSelection, EliminationState, RationalMatrix, rank_of_vectors
from .sigma import SigmaFn, floor_pseudoinverse_int


class GridError(ValueError):
    pass


Point = tuple[int, int]


@dataclass(frozen=True)
class Grid:
    n_a: int
    n_b: int
    points: frozenset[Point]

    def __post_init__(self):
        pts = frozenset((int(i), int(j)) for i, j in self.points)
        object.__setattr__(self, "points", pts)
        for i, j in pts:
            if not (1 <= i <= self.n_a and 1 <= j <= self.n_b):
                raise GridError(f"point {(i, j)} outside [{self.n_a}]x[{self.n_b}]")

    @classmethod
    def of(cls, n_a: int, n_b: int, points: Iterable[Sequence[int]]) -> Grid:
        return cls(n_a, n_b, frozenset(tuple(p) for p in points))

    @classmethod
    def from_heights(cls, n_a: int, n_b: int, heights: Sequence[int]) -> Grid:
        """Dense grid whose column ``i`` holds rows ``1..heights[i-1]``."""
        return cls(n_a, n_b, frozenset((i + 1, j + 1) for i, h in enumerate(heights) for j in range(h)))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(sorted(self.points))

    def __contains__(self, p) -> bool:
        return tuple(p) in self.points

    def column(self, i: int) -> list[int]:
        """Sorted row indices ``j`` with ``(i, j)`` in the grid."""
        return sorted(j for a, j in self.points if a == i)

    def row(self, j: int) -> list[int]:
        return sorted(i for i, b in self.points if b == j)

    def heights(self) -> list[int]:
        """``|G_[i,.]|`` for ``i = 1..n_a``."""
        h = [0] * self.n_a
        for i, _ in self.points:
            h[i - 1] += 1
        return h

    def widths(self) -> list[int]:
        """``|G_[.,j]|`` for ``j = 1..n_b``."""
        w = [0] * self.n_b
        for _, j in self.points:
            w[j - 1] += 1
        return w

    def is_dense(self) -> bool:
        return all(self.column(i) == list(range(1, len(self.column(i)) + 1)) for i in range(1, self.n_a + 1))

    def is_cdg(self) -> bool:
        h = self.heights()
        return self.is_dense() and all(a >= b for a, b in zip(h, h[1:]))

    def column_indices(self) -> list[int]:
        """1-based column indices in ``A (x) B`` for the points, ascending."""
        return sorted((i - 1) * self.n_b + j for i, j in self.points)

    def vectors(self, ctx: GridContext) -> list[list]:
        return [ctx.vector(i, j) for i, j in sorted(self.points)]

    def to_json_obj(self) -> dict:
        return {"nA": self.n_a, "nB": self.n_b, "points": [list(p) for p in sorted(self.points)]}

    @classmethod
    def from_json_obj(cls, obj: dict) -> Grid:
        try:
            return cls.of(int(obj["nA"]), int(obj["nB"]), obj["points"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GridError(f"bad grid JSON: {exc}") from exc


@dataclass(frozen=True)
class GridContext:
    a: RationalMatrix
    b: RationalMatrix

    @property
    def n_a(self) -> int:
        return self.a.cols

    @property
    def n_b(self) -> int:
        return self.b.cols

    def vector(self, i: int, j: int) -> list:
        ai, bj = self.a.column(i - 1), self.b.column(j - 1)
        return [x * y for x in ai for y in bj]

    def check(self, g: Grid):
        if (g.n_a, g.n_b) != (self.n_a, self.n_b):
            raise GridError(f"grid is {g.n_a}x{g.n_b} but context is {self.n_a}x{self.n_b}")

    def permute_a(self, perm: Sequence[int]) -> GridContext:
        """Context whose ``A`` column ``k`` is the old column ``perm[k-1]``."""
        cols = [self.a.column(p - 1) for p in perm]
        return GridContext(RationalMatrix.from_columns(cols), self.b)


def grid_rank(g: Grid, ctx: GridContext) -> int:
    """Exact rank of the columns of ``A (x) B`` that ``g`` represents."""
    ctx.check(g)
    return rank_of_vectors(g.vectors(ctx)) if g.points else 0


def grid_from_selection(p: ColumnSelection, n_a: int, n_b: int) -> Grid:
    if p.source_cols != n_a * n_b:
        raise GridError(f"selection over {p.source_cols} columns, grid has {n_a * n_b}")
    pts = []
    for c in p.indices:
        i = -(-c // n_b)
        pts.append((i, c - (i - 1) * n_b))
    return Grid.of(n_a, n_b, pts)


def projections(g: Grid) -> tuple[set[int], set[int]]:
    """``(P_A(G), P_B(G))``: nonempty grid columns and rows."""
    return {i for i, _ in g.points}, {j for _, j in g.points}


def basis_select(g: Grid, ctx: GridContext) -> Grid:
    """Colexicographically minimal basis: traverse and keep points outside the current span."""
    ctx.check(g)
    st = EliminationState(ctx.a.rows * ctx.b.rows)
    keep = [p for p in sorted(g.points) if st.add(ctx.vector(*p))]
    return Grid(g.n_a, g.n_b, frozenset(keep))


def vcollapse(g: Grid) -> Grid:
    """Drop every column's points to the bottom rows, keeping counts."""
    return Grid.from_heights(g.n_a, g.n_b, g.heights())


def _stable_desc(counts: Sequence[int]) -> list[int]:
    return sorted(range(1, len(counts) + 1), key=lambda k: -counts[k - 1])


def to_cdg(g: Grid) -> tuple[Grid, list[int], list[int]]:
    """Reorder rows then columns so that ``g`` becomes a CDG.

    Returns:
        ``(cdg, column_perm, row_perm)``; ``column_perm[k-1]`` is the original
        index of new column ``k`` (likewise for rows).  Both sorts are stable.

    Raises:
        GridError: if ``g`` is not a pre-CDG.
    """
    # rows contained in more columns go lower
    row_perm = _stable_desc(g.widths())
    row_new = {old: new + 1 for new, old in enumerate(row_perm)}
    col_perm = _stable_desc(g.heights())
    col_new = {old: new + 1 for new, old in enumerate(col_perm)}
    out = Grid(g.n_a, g.n_b, frozenset((col_new[i], row_new[j]) for i, j in g.points))
    if not out.is_cdg():
        raise GridError("grid is not a pre-CDG: no row/column reordering makes it compact and dense")
    return out, col_perm, row_perm


def is_pre_cdg(g: Grid) -> bool:
    try:
        to_cdg(g)
    except GridError:
        return False
    return True


def vexp(s: Grid, sigma_b: SigmaFn) -> Grid:
    """Vertical expansion of a CDG: column height h becomes ``min(n_B, floor(sigma_B^dagger(h)))``."""
    h = [floor_pseudoinverse_int(sigma_b, x, s.n_b) if x > 0 else 0 for x in s.heights()]
    return Grid.from_heights(s.n_a, s.n_b, h)


def hexp(s: Grid, sigma_a: SigmaFn) -> Grid:
    """Horizontal expansion of a CDG: row width w becomes ``min(n_A, floor(sigma_A^dagger(w)))``."""
    w = [floor_pseudoinverse_int(sigma_a, x, s.n_a) if x > 0 else 0 for x in s.widths()]
    return Grid(s.n_a, s.n_b, frozenset((i + 1, j + 1) for j, wj in enumerate(w) for i in range(wj)))


def grid_expand(s: Grid, sigma_a: SigmaFn, sigma_b: SigmaFn) -> Grid:
    """``HExp(VExp(CDG(s)))`` for a pre-CDG ``s``."""
    cdg, _, _ = to_cdg(s)
    return hexp(vexp(cdg, sigma_b), sigma_a)


def discrete_step(g: Grid, ctx: GridContext) -> Grid:
    """A pre-CDG ``S`` with ``|S| <= rank(G)`` and ``|G| <= |GridExp(S)|``.

    Collapse ``G``, order its columns into a CDG ``D``, take the basis ``B_D``
    (with ``A``'s columns permuted to match), trim each basis column ``p``
    from the top to ``rank(G_[p,.])`` points, and map back to the original
    column indices.
    """
    ctx.check(g)
    heights = g.heights()
    perm = _stable_desc(heights)
    d = Grid.from_heights(g.n_a, g.n_b, [heights[p - 1] for p in perm])
    b_d = basis_select(d, ctx.permute_a(perm))
    kept = []
    for new_i, old_i in enumerate(perm, start=1):
        col = b_d.column(new_i)
        if not col:
            continue
        r_p = rank_of_vectors([ctx.b.column(j - 1) for j in g.column(old_i)])
        kept.extend((old_i, j) for j in col[:r_p])
    return Grid(g.n_a, g.n_b, frozenset(kept))
