"""Jets of sections, flat-jet maps, and the passage between B-opers and
scalar opers.

The builder goes from a self-adjoint scalar oper and a flat orthogonal
bundle W to B-oper data on J ⊗ W; extraction and trace-scalarization go
back, over truncated series at the base point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

from .boper import (
    ORTHOGONAL,
    SYMPLECTIC,
    BilinearForm,
    BOperData,
    ConnectionMatrix,
    Filtration,
    adapt,
    check_b_connection,
    s_prime_form,
)
from .diffop import OperClass, WeightedDiffOp, classify
from .errors import (
    ArityMismatch,
    DivisionByZero,
    InsufficientOrder,
    JetDegenerate,
    NotAnOper,
)
from .exact.matrix import Matrix, kron, series_matrix_inverse
from .exact.ode import series_solve_linear_ode
from .exact.ratfunc import RationalFunction, as_rf
from .exact.series import TruncatedSeries


# jets of sections -------------------------------------------------------------------

@dataclass(frozen=True)
class JetVector:
    k: int
    r: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.k + 1 or any(len(e) != self.r for e in self.entries):
            raise ArityMismatch(f"a {self.k}-jet of rank {self.r} needs {self.k + 1} blocks of size {self.r}")

    @property
    def rank(self) -> int:
        return (self.k + 1) * self.r

    def flat(self) -> list[Fraction]:
        return [x for block in self.entries for x in block]

    def truncate(self) -> "JetVector":
        return JetVector(self.k - 1, self.r, self.entries[:-1])


def jet_rank(m: int, r0: int) -> int:
    """Rank of J^m(W) for W of rank r0."""
    return (m + 1) * r0


def _as_series(x, z0: Fraction, k: int) -> TruncatedSeries:
    if isinstance(x, TruncatedSeries):
        return x
    return TruncatedSeries.from_rf(as_rf(x), z0, k)


def jet_prolong(s, k: int, z0=0) -> JetVector:
    """(s(z0), s'(z0), ..., s^(k)(z0)) for a scalar or vector section."""
    z0 = Fraction(z0)
    vec = list(s) if isinstance(s, (list, tuple)) else [s]
    series = [_as_series(x, z0, k) for x in vec]
    for x in series:
        if x.order < k:
            raise InsufficientOrder(f"series of order {x.order} has no {k}-jet")
    blocks = tuple(tuple(x.derivative_at(j) for x in series) for j in range(k + 1))
    return JetVector(k, len(series), blocks)


def truncation_matrix(j: int, r: int) -> Matrix:
    """J^j -> J^(j-1): drop the top block."""
    rows = []
    for i in range(j * r):
        rows.append([Fraction(1) if c == i else Fraction(0) for c in range((j + 1) * r)])
    return Matrix(rows)


def truncation_kernel_rank(j: int, r: int) -> int:
    t = truncation_matrix(j, r)
    return (j + 1) * r - t.rank()


# flat-jet maps -----------------------------------------------------------------------

@dataclass(frozen=True)
class FlatJetMap:
    k: int
    r: int
    matrix: Matrix

    def is_invertible(self) -> bool:
        m = self.matrix
        return m.is_square() and bool(m.det())


def flat_sections(conn: ConnectionMatrix, z0, N: int) -> Matrix:
    return series_solve_linear_ode(conn.A, z0, N)


def flat_jet_map(conn: ConnectionMatrix, proj: Matrix, k: int, z0=0, N: int | None = None) -> FlatJetMap:
    """Columns are k-jets at z0 of proj applied to the flat extension of each basis vector."""
    z0 = Fraction(z0)
    N = k + 1 if N is None else max(N, k)
    psi = flat_sections(conn, z0, N)
    proj_s = _to_series_matrix(proj, z0, N)
    q = proj_s @ psi
    cols = [jet_prolong(q.col(j), k, z0).flat() for j in range(q.ncols)]
    return FlatJetMap(k, q.nrows, Matrix.from_columns(cols))


def _to_series_matrix(m: Matrix, z0: Fraction, N: int) -> Matrix:
    return m.map(lambda x: x if isinstance(x, TruncatedSeries) else TruncatedSeries.from_rf(as_rf(x), z0, N))


def quotient_projection(data: BOperData) -> Matrix:
    """E -> Q = E/E_{n-1} in the adapted frame: last r rows of g^-1."""
    g = data.filt.adapted_frame()
    gi = g.inverse()
    m = gi.nrows
    return gi.submatrix(m - data.r, m, 0, m)


@dataclass(frozen=True)
class JetFiltrationCheck:
    invertible: bool
    carries_filtration: bool
    diagonal_invertible: bool

    @property
    def ok(self) -> bool:
        return self.invertible and self.carries_filtration and self.diagonal_invertible


def check_flat_jet_filtration(data: BOperData, N: int | None = None) -> JetFiltrationCheck:
    """f_{n-1} is invertible and sends E_i onto the jets vanishing to order n-1-i.

    In the adapted frame the matrix f_{n-1} g(z0) has zero (p, q) blocks for
    jet level p < n - q, and invertible blocks on p = n - q.
    """
    n, r = data.n, data.r
    z0 = data.base_point
    N = 2 * n + 2 if N is None else N
    fmap = flat_jet_map(data.conn, quotient_projection(data), n - 1, z0, N)
    g0 = data.filt.adapted_frame().evaluate(z0)
    m = fmap.matrix @ g0
    inv = bool(m.det())
    carries = True
    diag = True
    for qb in range(1, n + 1):
        for p in range(n):
            blk = m.submatrix(p * r, (p + 1) * r, (qb - 1) * r, qb * r)
            if p < n - qb and not blk.is_zero():
                carries = False
            if p == n - qb and not blk.det():
                diag = False
    return JetFiltrationCheck(inv, carries, diag)


# jet bundles of tensor products ----------------------------------------------------------

def jet_tensor_matrix(V_rank: int, W_rank: int, W_conn: ConnectionMatrix, n: int, z0=0) -> Matrix:
    """Matrix of J^n(V) (x) W -> J^n(V (x) W) at z0.

    The jet with p-th derivative e_a is realized by (z - z0)^p/p! e_a, each
    w_b by its flat extension; the image is the n-jet of the product.
    """
    z0 = Fraction(z0)
    psi = flat_sections(W_conn, z0, n + 1)
    # derivatives s_b^(j)(z0), indexed [b][j][b']
    der = [[[psi[b2, b].derivative_at(j) for b2 in range(W_rank)] for j in range(n + 1)] for b in range(W_rank)]
    size = (n + 1) * V_rank * W_rank

    def idx(level: int, a: int, b: int) -> int:
        return (level * V_rank + a) * W_rank + b

    rows = [[Fraction(0)] * size for _ in range(size)]
    for p in range(n + 1):
        for a in range(V_rank):
            for b in range(W_rank):
                col = idx(p, a, b)
                for q in range(p, n + 1):
                    c = comb(q, p)
                    for b2 in range(W_rank):
                        v = der[b][q - p][b2]
                        if v:
                            rows[idx(q, a, b2)][col] += c * v
    return Matrix(rows)


def check_jet_tensor_iso(V_rank: int, W_rank: int, W_conn: ConnectionMatrix, n: int, z0=0) -> bool:
    m = jet_tensor_matrix(V_rank, W_rank, W_conn, n, z0)
    return m.nrows == jet_rank(n, V_rank * W_rank) and bool(m.det())


# matrix-coefficient operators ---------------------------------------------------------------

@dataclass(frozen=True)
class MatrixDiffOp:
    """sum_k C_k d^k with r x r coefficient blocks (series or rational)."""

    coeffs: tuple

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def r(self) -> int:
        return self.coeffs[0].nrows

    def symbol(self) -> Matrix:
        return self.coeffs[-1]

    def apply(self, s: Sequence) -> list:
        derivs = [list(s)]
        for _ in range(self.order):
            derivs.append([x.derivative() for x in derivs[-1]])
        keep = min(x.order for x in derivs[-1])
        acc = [x.truncate(keep) * 0 for x in derivs[-1]]
        for ck, dk in zip(self.coeffs, derivs):
            out = ck.apply([x.truncate(keep) for x in dk])
            acc = [a + b for a, b in zip(acc, out)]
        return acc

    @classmethod
    def from_scalar(cls, D: WeightedDiffOp, r: int) -> "MatrixDiffOp":
        blocks = []
        for c in D.coeffs:
            zero = c * 0
            blocks.append(Matrix([[c if i == j else zero for j in range(r)] for i in range(r)]))
        return cls(tuple(blocks))


def extract_quotient_operator(data: BOperData, N: int | None = None) -> MatrixDiffOp:
    """The order-n operator on Q annihilating projections of flat sections.

    With q = proj * Psi and Y = [q; q'; ...; q^(n-1)], the coefficients
    solve q^(n) = [c_0 ... c_{n-1}] Y, and D = d^n - sum c_k d^k.
    """
    n, r = data.n, data.r
    z0 = data.base_point
    N = 2 * n + 2 if N is None else N
    if N < n:
        raise InsufficientOrder(f"series order {N} below operator order {n}")
    psi = flat_sections(data.conn, z0, N)
    proj = _to_series_matrix(quotient_projection(data), z0, N)
    q = proj @ psi
    derivs = [q]
    for _ in range(n):
        derivs.append(derivs[-1].derivative())
    keep = N - n
    derivs = [d.map(lambda s: s.truncate(keep)) for d in derivs]
    Y = derivs[0]
    for d in derivs[1:n]:
        Y = Y.vstack(d)
    try:
        Yi = series_matrix_inverse(Y)
    except DivisionByZero:
        raise JetDegenerate("flat-jet matrix f_{n-1} is singular at the base point") from None
    c = derivs[n] @ Yi
    one = TruncatedSeries.const(1, z0, keep)
    ident = Matrix.identity(r, one)
    coeffs = [-c.submatrix(0, r, k * r, (k + 1) * r) for k in range(n)] + [ident]
    return MatrixDiffOp(tuple(coeffs))


def self_adjoint_defect(Dmat: MatrixDiffOp, H: Matrix) -> MatrixDiffOp:
    """(-1)^n H^-1 sum_k (-1)^k d^k o (C_k^T H) minus D, for the pairing s^T H t."""
    n = Dmat.order
    z0 = Dmat.coeffs[0][0, 0].base_point
    order = min(x.order for c in Dmat.coeffs for x in c.entries())
    Hs = _to_series_matrix(H, z0, order)
    Hi = series_matrix_inverse(Hs)
    # coefficient of t^(i) in d^k (M t) is C(k, i) M^(k-i)
    out = [Dmat.coeffs[0] * 0 for _ in range(n + 1)]
    for k, ck in enumerate(Dmat.coeffs):
        M = ck.T @ Hs
        derivs = [M]
        for _ in range(k):
            derivs.append(derivs[-1].derivative())
        for i in range(k + 1):
            term = derivs[k - i] * (Fraction((-1) ** (k + n)) * comb(k, i))
            out[i] = _add_trunc(out[i], Hi @ term)
    return MatrixDiffOp(tuple(_add_trunc(o, -c) for o, c in zip(out, Dmat.coeffs)))


def _add_trunc(a: Matrix, b: Matrix) -> Matrix:
    return Matrix([[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a.rows, b.rows)])


def is_zero_op(D: MatrixDiffOp) -> bool:
    return all(c.is_zero() for c in D.coeffs)


def tau_scalarize(Dmat: MatrixDiffOp, nabla_Q: ConnectionMatrix, N: int | None = None) -> WeightedDiffOp:
    """Conjugate into a flat frame of Q and take (1/r) trace of each coefficient."""
    n, r = Dmat.order, Dmat.r
    z0 = Dmat.coeffs[0][0, 0].base_point
    order = min(x.order for c in Dmat.coeffs for x in c.entries())
    N = order + n if N is None else N
    Phi = series_solve_linear_ode(nabla_Q.A, z0, N)
    derivs = [Phi]
    for _ in range(n):
        derivs.append(derivs[-1].derivative())
    keep = min(order, N - n)
    derivs = [d.map(lambda s: s.truncate(keep)) for d in derivs]
    Phi_inv = series_matrix_inverse(derivs[0])
    coeffs = [c.map(lambda s: s.truncate(keep)) for c in Dmat.coeffs]
    scalars = []
    for i in range(n + 1):
        acc = None
        for k in range(i, n + 1):
            term = (coeffs[k] @ derivs[k - i]) * comb(k, i)
            acc = term if acc is None else _add_trunc(acc, term)
        conj = Phi_inv @ acc
        scalars.append(conj.trace() * Fraction(1, r))
    return WeightedDiffOp(scalars)


# builder -------------------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarOperBundle:
    oper: WeightedDiffOp
    W_form: BilinearForm
    W_conn: ConnectionMatrix

    def __post_init__(self):
        if self.W_form.parity != ORTHOGONAL:
            raise ArityMismatch("W must carry an orthogonal form")
        if self.W_form.rank != self.W_conn.rank:
            raise ArityMismatch("W form and connection differ in rank")
        ok, _ = check_b_connection(self.W_conn, self.W_form)
        if not ok:
            raise NotAnOper("the connection on W does not preserve its form")

    @property
    def r(self) -> int:
        return self.W_form.rank

    @classmethod
    def trivial(cls, oper: WeightedDiffOp, r: int = 1) -> "ScalarOperBundle":
        return cls(oper, BilinearForm(Matrix.identity(r), ORTHOGONAL), ConnectionMatrix(Matrix.zeros(r, r)))


def companion_connection(oper: WeightedDiffOp) -> Matrix:
    """A with flat sections the jets (s, s', ..., s^(n-1)) of solutions of oper s = 0."""
    n = oper.order
    zero, one = RationalFunction.const(0), RationalFunction.const(1)
    rows = [[zero] * n for _ in range(n)]
    for j in range(1, n):
        rows[j - 1][j] = -one
    for k in range(n):
        rows[n - 1][k] = _rf(oper.coeffs[k])
    return Matrix(rows)


def _rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    raise ArityMismatch("builder needs rational-function coefficients")


def concomitant_form(oper: WeightedDiffOp) -> Matrix:
    """Bilinear concomitant of the oper divided by (n-1)!.

    P(u, v) = sum_k sum_{j<k} (-1)^j (a_k v)^(j) u^(k-1-j); entry (p, q) is
    the coefficient of u^(p) v^(q).  For d^n it is the symmetric-power
    pairing on Sym^(n-1)(C^2) read through the solutions z^m.
    """
    n = oper.order
    zero = RationalFunction.const(0)
    rows = [[zero] * n for _ in range(n)]
    derivs = []
    for a in oper.coeffs:
        lst = [_rf(a)]
        for _ in range(n):
            lst.append(lst[-1].derivative())
        derivs.append(lst)
    for k in range(1, n + 1):
        for j in range(k):
            for i in range(j + 1):
                c = derivs[k][j - i]
                if c:
                    rows[k - 1 - j][i] = rows[k - 1 - j][i] + c * ((-1) ** j * comb(j, i))
    scale = Fraction(1, factorial(n - 1))
    return Matrix([[x * scale for x in r] for r in rows])


def jet_frame(n: int) -> Matrix:
    """Adapted frame f_i = (-1)^i e_{n-i} of the jet filtration (columns)."""
    cols = []
    for i in range(1, n + 1):
        v = [RationalFunction.const(0)] * n
        v[n - i] = RationalFunction.const((-1) ** i)
        cols.append(v)
    return Matrix.from_columns(cols)


def build_boper_from_parts(parts: ScalarOperBundle, g: int = 2, deg_Q: int = 0, base_point=0) -> BOperData:
    oper = parts.oper
    n, r = oper.order, parts.r
    if n < 2:
        raise NotAnOper("builder needs order n >= 2")
    cls = classify(oper)
    if cls not in (OperClass.SP, OperClass.SO):
        raise NotAnOper(f"operator classifies as {cls}, need Sp or SO")
    A_w = parts.W_conn.A
    I_r = Matrix.identity(r)
    I_n = Matrix.identity(n)
    A = kron(companion_connection(oper), I_r) + kron(I_n, A_w)
    B = kron(concomitant_form(oper), parts.W_form.matrix)
    frame = kron(jet_frame(n), I_r)
    m = n * r
    steps = tuple(frame.submatrix(0, m, 0, i * r) for i in range(1, n + 1))
    form = BilinearForm(B, SYMPLECTIC if n % 2 == 0 else ORTHOGONAL)
    return BOperData(
        form,
        Filtration(steps, r),
        ConnectionMatrix(A),
        genus=g,
        deg_Q=deg_Q,
        base_point=Fraction(base_point),
        q_conn=ConnectionMatrix(A_w),
    )


def quotient_form(data: BOperData) -> Matrix:
    """The pairing on Q used for the self-adjointness of the extracted operator."""
    sp = s_prime_form(data, adapt(data.conn, data.filt, data.form))
    return sp.form_matrix.inverse()


def round_trip(parts: ScalarOperBundle, N: int | None = None, base_point=0) -> tuple[WeightedDiffOp, WeightedDiffOp]:
    """(input oper as series, tau(extract(build(parts)))) truncated alike."""
    data = build_boper_from_parts(parts, base_point=base_point)
    n = data.n
    N = 2 * n + 2 if N is None else N
    Dmat = extract_quotient_operator(data, N)
    out = tau_scalarize(Dmat, data.q_conn, N)
    keep = min(c.order for c in out.coeffs)
    z0 = Fraction(base_point)
    ref = WeightedDiffOp([TruncatedSeries.from_rf(_rf(c), z0, keep) for c in parts.oper.coeffs])
    out = WeightedDiffOp([c.truncate(keep) for c in out.coeffs])
    return ref, out
