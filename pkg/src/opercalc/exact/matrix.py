"""Dense matrices over any of the exact rings (Fraction, RationalFunction,
TruncatedSeries).

Elimination needs a way to tell whether an entry can be used as a pivot.
For fields that is just "nonzero"; for truncated series it is "nonzero
constant term", which is exactly the condition for the series to be a unit.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence

from ..errors import ArityMismatch, DivisionByZero
from .ratfunc import RationalFunction
from .series import TruncatedSeries


def is_unit(x) -> bool:
    if isinstance(x, TruncatedSeries):
        return bool(x.coeffs[0])
    return bool(x)


def zero_like(x):
    return x * 0


def one_like(x):
    return x * 0 + 1


class Matrix:
    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(r) for r in rows)
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise ArityMismatch("ragged matrix rows")

    @classmethod
    def identity(cls, n: int, one=None) -> "Matrix":
        one = RationalFunction.const(1) if one is None else one
        zero = zero_like(one)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, m: int, n: int, zero=None) -> "Matrix":
        zero = RationalFunction.const(0) if zero is None else zero
        return cls([[zero] * n for _ in range(m)])

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "Matrix":
        if not cols:
            raise ArityMismatch("no columns")
        return cls(zip(*cols))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def col(self, j: int) -> list:
        return [r[j] for r in self.rows]

    def columns(self) -> list[list]:
        return [self.col(j) for j in range(self.ncols)]

    def entries(self):
        for r in self.rows:
            yield from r

    def map(self, f: Callable) -> "Matrix":
        return Matrix([[f(x) for x in r] for r in self.rows])

    def _zero(self):
        return zero_like(self.rows[0][0])

    def _one(self):
        return one_like(self.rows[0][0])

    # structure --------------------------------------------------------------
    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        return Matrix([r[c0:c1] for r in self.rows[r0:r1]])

    def block(self, i: int, j: int, size: int) -> "Matrix":
        """(i, j) block (1-indexed) of a matrix split into size×size blocks."""
        return self.submatrix((i - 1) * size, i * size, (j - 1) * size, j * size)

    def hstack(self, other: "Matrix") -> "Matrix":
        return Matrix([a + b for a, b in zip(self.rows, other.rows)])

    def vstack(self, other: "Matrix") -> "Matrix":
        return Matrix(self.rows + other.rows)

    @property
    def T(self) -> "Matrix":
        return Matrix(zip(*self.rows)) if self.rows else self

    def transpose(self) -> "Matrix":
        return self.T

    def is_zero(self) -> bool:
        return not any(bool(x) for x in self.entries())

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_symmetric(self) -> bool:
        return self == self.T

    def is_antisymmetric(self) -> bool:
        return self == -self.T

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    # arithmetic -------------------------------------------------------------
    def __neg__(self) -> "Matrix":
        return self.map(lambda x: -x)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ArityMismatch(f"shape {self.shape} + {other.shape}")
        return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ArityMismatch(f"shape {self.shape} - {other.shape}")
        return Matrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __mul__(self, other) -> "Matrix":
        if isinstance(other, Matrix):
            return self.matmul(other)
        return self.map(lambda x: x * other)

    def __rmul__(self, other) -> "Matrix":
        return self.map(lambda x: other * x)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return self.matmul(other)

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ArityMismatch(f"shape {self.shape} @ {other.shape}")
        cols = other.columns()
        zero = self._zero() if self.rows and self.ncols else None
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = zero
                for a, b in zip(r, c):
                    if a and b:
                        acc = acc + a * b
                if acc is None:
                    acc = zero_like(c[0])
                row.append(acc)
            out.append(row)
        return Matrix(out)

    def __pow__(self, k: int) -> "Matrix":
        result = Matrix.identity(self.nrows, self._one())
        for _ in range(k):
            result = result @ self
        return result

    def apply(self, v: Sequence) -> list:
        return [sum((a * b for a, b in zip(r, v) if a and b), zero_like(v[0])) for r in self.rows]

    def derivative(self) -> "Matrix":
        return self.map(lambda x: x.derivative())

    def trace(self):
        acc = self._zero()
        for i in range(min(self.shape)):
            acc = acc + self.rows[i][i]
        return acc

    def evaluate(self, x) -> "Matrix":
        return self.map(lambda f: f(x) if not isinstance(f, (int, Fraction)) else Fraction(f))

    def to_series(self, base_point, order: int) -> "Matrix":
        return self.map(lambda f: TruncatedSeries.from_rf(_as_rf(f), base_point, order))

    def coefficient(self, k: int) -> "Matrix":
        """Matrix of k-th Taylor coefficients of a series matrix."""
        return self.map(lambda s: s.coeffs[k])

    # elimination ------------------------------------------------------------
    def _echelon(self, reduced: bool):
        """Row-reduce a copy; returns (rows, pivot columns, sign of row swaps)."""
        rows = [list(r) for r in self.rows]
        m, n = self.shape
        pivots: list[int] = []
        sign = 1
        pr = 0
        for c in range(n):
            if pr >= m:
                break
            piv = next((i for i in range(pr, m) if is_unit(rows[i][c])), None)
            if piv is None:
                continue
            if piv != pr:
                rows[pr], rows[piv] = rows[piv], rows[pr]
                sign = -sign
            p = rows[pr][c]
            start = 0 if reduced else pr + 1
            if reduced:
                inv = 1 / p
                rows[pr] = [x * inv if x else x for x in rows[pr]]
                p = rows[pr][c]
            for i in range(start, m):
                if i == pr:
                    continue
                f = rows[i][c]
                if not f:
                    continue
                f = f / p
                rows[i] = [x - f * y if y else x for x, y in zip(rows[i], rows[pr])]
            pivots.append(c)
            pr += 1
        return rows, pivots, sign

    def det(self):
        if not self.is_square():
            raise ArityMismatch(f"determinant of non-square {self.shape}")
        if self.nrows == 0:
            return RationalFunction.const(1)
        if self.nrows == 1:
            return self.rows[0][0]
        if self.nrows == 2:
            (a, b), (c, d) = self.rows
            return a * d - b * c
        rows, pivots, sign = self._echelon(reduced=False)
        if len(pivots) < self.nrows:
            return self._zero()
        acc = self._one() * sign
        for i in range(self.nrows):
            acc = acc * rows[i][i]
        return acc

    def rank(self) -> int:
        return len(self._echelon(reduced=False)[1])

    def inverse(self) -> "Matrix":
        if not self.is_square():
            raise ArityMismatch(f"inverse of non-square {self.shape}")
        n = self.nrows
        aug = self.hstack(Matrix.identity(n, self._one()))
        rows, pivots, _ = aug._echelon(reduced=True)
        if pivots[:n] != list(range(n)):
            raise DivisionByZero("matrix is not invertible")
        return Matrix([r[n:] for r in rows])

    def nullspace(self) -> list[list]:
        """Basis of {v : M v = 0} (field entries only)."""
        rows, pivots, _ = self._echelon(reduced=True)
        n = self.ncols
        zero, one = self._zero(), self._one()
        basis = []
        for free in (c for c in range(n) if c not in pivots):
            v = [zero] * n
            v[free] = one
            for r, pc in enumerate(pivots):
                v[pc] = -rows[r][free]
            basis.append(v)
        return basis

    def column_basis(self) -> "Matrix | None":
        """Independent columns spanning the column space (None if zero)."""
        _, pivots, _ = self._echelon(reduced=False)
        if not pivots:
            return None
        return Matrix.from_columns([self.col(j) for j in pivots])

    def char_poly(self) -> list:
        """Coefficients c_0..c_n of det(x I - M), by Faddeev-LeVerrier."""
        n = self.nrows
        one = self._one()
        ident = Matrix.identity(n, one)
        coeffs = [None] * (n + 1)
        coeffs[n] = one
        mk = Matrix.zeros(n, n, zero_like(one))
        for k in range(1, n + 1):
            mk = self @ mk + ident * coeffs[n - k + 1]
            coeffs[n - k] = -(self @ mk).trace() * Fraction(1, k)
        return coeffs

    def __repr__(self) -> str:
        return "Matrix([" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.rows) + "])"


RfMatrix = Matrix


def _as_rf(f) -> RationalFunction:
    if isinstance(f, RationalFunction):
        return f
    return RationalFunction._coerce(f)


def rf_matrix(rows) -> Matrix:
    """Build a matrix of rational functions from strings / numbers."""
    from .ratfunc import as_rf

    return Matrix([[as_rf(x) for x in r] for r in rows])


def block_matrix(blocks: Sequence[Sequence[Matrix]]) -> Matrix:
    out = []
    for brow in blocks:
        for i in range(brow[0].nrows):
            row: list = []
            for b in brow:
                row.extend(b.rows[i])
            out.append(row)
    return Matrix(out)


def block_diag(blocks: Sequence[Matrix], zero=None) -> Matrix:
    zero = blocks[0]._zero() if zero is None else zero
    n = sum(b.nrows for b in blocks)
    m = sum(b.ncols for b in blocks)
    out = [[zero] * m for _ in range(n)]
    r = c = 0
    for b in blocks:
        for i, row in enumerate(b.rows):
            out[r + i][c:c + b.ncols] = row
        r += b.nrows
        c += b.ncols
    return Matrix(out)


def kron(a: Matrix, b: Matrix) -> Matrix:
    return Matrix(
        [[x * y for x in ra for y in rb] for ra in a.rows for rb in b.rows]
    )


def span_equal(f: Matrix, g: Matrix) -> bool:
    """Column spans of f and g coincide (exact, over the entry field)."""
    rf, rg = f.rank(), g.rank()
    return rf == rg and f.hstack(g).rank() == rf


def span_contains(f: Matrix, g: Matrix) -> bool:
    """Column span of g lies inside the column span of f."""
    return f.hstack(g).rank() == f.rank()


def series_matrix_inverse(m: Matrix) -> Matrix:
    """Inverse of a square series matrix with invertible value at the base point.

    Uses X_0 = Y_0^{-1}, X_k = -Y_0^{-1} sum_{i>=1} Y_i X_{k-i}, which costs
    one rational inversion plus coefficient products.
    """
    first = m.rows[0][0]
    z0, order = first.base_point, min(s.order for s in m.entries())
    n = m.nrows
    ys = [m.coefficient(k) for k in range(order + 1)]
    try:
        y0inv = ys[0].inverse()
    except DivisionByZero:
        raise DivisionByZero("series matrix is singular at the base point") from None
    xs = [y0inv]
    for k in range(1, order + 1):
        acc = Matrix.zeros(n, n, Fraction(0))
        for i in range(1, k + 1):
            if not ys[i].is_zero():
                acc = acc + ys[i] @ xs[k - i]
        xs.append(-(y0inv @ acc))
    return coefficients_to_series(xs, z0)


def coefficients_to_series(coeff_mats: Sequence[Matrix], base_point) -> Matrix:
    m, n = coeff_mats[0].shape
    z0 = Fraction(base_point)
    return Matrix(
        [
            [TruncatedSeries._raw(z0, tuple(Fraction(c.rows[i][j]) for c in coeff_mats)) for j in range(n)]
            for i in range(m)
        ]
    )
