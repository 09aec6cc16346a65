"""Dense exact rational linear algebra: rank, determinant, nullspace, canonical bases.

Everything in this module is exact.  Entries are arbitrary-precision
rationals (gmpy2.mpq when available, fractions.Fraction otherwise) and no
floating point is used anywhere.  Rank and determinant go through
fraction-free (Bareiss) elimination on denominator-cleared integer rows,
which keeps intermediate integers at minor-determinant size.
"""

from __future__ import annotations

from math import lcm
from typing import Iterable, Sequence

try:
    from gmpy2 import mpq as _mpq

    def Q(numerator, denominator=1):
        """Exact rational from integers (or a 'p/q' string)."""
        return _mpq(numerator, denominator)

except ImportError:  # pragma: no cover - gmpy2 is normally present
    from fractions import Fraction as _Fraction

    def Q(numerator, denominator=1):
        """Exact rational from integers (or a 'p/q' string)."""
        return _Fraction(numerator, denominator)


QZERO = Q(0)
QONE = Q(1)


def rat_to_str(x) -> str:
    """Serialize a rational as "numerator/denominator" (e.g. "-3/7")."""
    return f"{x.numerator}/{x.denominator}"


def rat_from_str(s: str):
    """Parse "p/q" (or a bare integer string) into an exact rational."""
    num, _, den = s.partition("/")
    return Q(int(num), int(den)) if den else Q(int(num))


class RationalMatrix:
    """Immutable dense matrix over exact rationals, stored row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Iterable[Iterable]):
        grid = tuple(tuple(Q(x) if isinstance(x, int) else x for x in row) for row in data)
        if len(grid) != rows or any(len(r) != cols for r in grid):
            raise ValueError(f"data shape does not match {rows}x{cols}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", grid)

    def __setattr__(self, name, value):
        raise AttributeError("RationalMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        return cls(len(rows), ncols, rows)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, [[QONE if i == j else QZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(rows, cols, [[QZERO] * cols for _ in range(rows)])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        return f"RationalMatrix({self.rows}x{self.cols})"

    def entry(self, i: int, j: int):
        return self.data[i][j]

    def row(self, i: int) -> tuple:
        return self.data[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.data)

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(self.cols, self.rows, zip(*self.data)) if self.rows else RationalMatrix(
            self.cols, 0, [[] for _ in range(self.cols)]
        )

    def select_columns(self, cols: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix(self.rows, len(cols), ([r[j] for j in cols] for r in self.data))

    def stack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.cols:
            raise ValueError("column counts differ")
        return RationalMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        ot = list(zip(*other.data)) if other.rows else []
        out = []
        for r in self.data:
            out.append(
                [sum((a * b for a, b in zip(r, col) if a and b), QZERO) for col in ot]
                if ot
                else []
            )
        return RationalMatrix(self.rows, other.cols, out)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.data for x in r)

    def scale_column(self, j: int, factor) -> "RationalMatrix":
        return RationalMatrix(
            self.rows,
            self.cols,
            ([x * factor if k == j else x for k, x in enumerate(r)] for r in self.data),
        )

    def to_json(self) -> list[list[str]]:
        return [[rat_to_str(x) for x in r] for r in self.data]

    @classmethod
    def from_json(cls, grid: Sequence[Sequence[str]]) -> "RationalMatrix":
        rows = [[rat_from_str(x) for x in r] for r in grid]
        return cls.from_rows(rows) if rows else cls.zeros(0, 0)


def _integer_rows(m: RationalMatrix) -> list[list[int]]:
    """Clear denominators row by row (row scaling leaves the rank unchanged)."""
    out = []
    for row in m.data:
        mult = 1
        for x in row:
            mult = lcm(mult, int(x.denominator))
        out.append([int(x * mult) for x in row])
    return out


def rank(m: RationalMatrix) -> int:
    """Exact rank over the rationals via fraction-free Bareiss elimination."""
    a = _integer_rows(m)
    nrows, ncols = m.rows, m.cols
    r = 0
    prev = 1
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pivot = a[r][c]
        for i in range(r + 1, nrows):
            ai, f = a[i], a[i][c]
            for j in range(c + 1, ncols):
                ai[j] = (pivot * ai[j] - f * a[r][j]) // prev
            ai[c] = 0
        prev = pivot
        r += 1
        if r == nrows:
            break
    return r


def det(m: RationalMatrix):
    """Exact determinant (Bareiss).  Raises ValueError for non-square input."""
    if m.rows != m.cols:
        raise ValueError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    if n == 0:
        return QONE
    a = []
    scale = QONE  # product of the row-clearing multipliers
    for row in m.data:
        mult = 1
        for x in row:
            mult = lcm(mult, int(x.denominator))
        scale = scale * mult
        a.append([int(x * mult) for x in row])
    sign = 1
    prev = 1
    for c in range(n - 1):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return QZERO
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        pivot = a[c][c]
        for i in range(c + 1, n):
            ai, f = a[i], a[i][c]
            for j in range(c + 1, n):
                ai[j] = (pivot * ai[j] - f * a[c][j]) // prev
            ai[c] = 0
        prev = pivot
    return Q(sign) * Q(a[n - 1][n - 1]) / scale


def _rref(rows: list[list], ncols: int) -> tuple[list[list], list[int]]:
    """In-place reduced row echelon form; returns (rows, pivot column indices)."""
    a = rows
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c]
        if inv != 1:
            a[r] = [x / inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                arow = a[r]
                a[i] = [x - f * y if y else x for x, y in zip(a[i], arow)]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def nullspace(m: RationalMatrix) -> RationalMatrix:
    """Canonical exact nullspace basis: M @ B = 0, columns independent.

    The basis is the unique reduced-column-echelon representative with
    pivots on the lowest row indices (the same form rref_canonicalize
    produces).  It is obtained by running RREF on the column-reversed
    matrix, which makes the free columns land on the smallest original
    coordinates.
    """
    ncols = m.cols
    rev = [list(row[::-1]) for row in m.data]
    a, pivots = _rref(rev, ncols)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    # free column f (in reversed coordinates) -> basis vector with 1 at
    # original coordinate ncols-1-f; larger f = smaller pivot row index.
    basis_cols = []
    for f in sorted(free, reverse=True):
        v = [QZERO] * ncols
        v[f] = QONE
        for row_idx, p in enumerate(pivots):
            coef = a[row_idx][f]
            if coef:
                v[p] = -coef
        basis_cols.append(v[::-1])
    if not basis_cols:
        return RationalMatrix(ncols, 0, [[] for _ in range(ncols)])
    return RationalMatrix.from_rows(list(zip(*basis_cols)))


def rref_canonicalize(b: RationalMatrix) -> RationalMatrix:
    """Unique reduced-column-echelon representative of the column space of b.

    Pivots sit on the lowest possible row indices with pivot entries 1;
    linearly dependent columns are dropped, so the output has rank(b)
    columns and the same column space.
    """
    rows = [list(col) for col in zip(*b.data)] if b.rows else []
    a, pivots = _rref(rows, b.rows)
    kept = a[: len(pivots)]
    if not kept:
        return RationalMatrix(b.rows, 0, [[] for _ in range(b.rows)])
    return RationalMatrix.from_rows(list(zip(*kept)))
