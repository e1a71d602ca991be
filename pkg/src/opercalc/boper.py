"""Generalized B-opers presented by frames over Q(z).

Everything is a matrix in an ambient frame of E: the bilinear form B, the
connection D = d + A (flat sections solve s' = -A s), and the filtration
E_1 < ... < E_n given by generator columns.  Checks that are fiberwise in
nature are done generically (in Q(z)) and then witnessed at a point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    ArityMismatch,
    DegenerateForm,
    IndexOutOfRange,
    InsufficientOrder,
    NonInvertibleStep,
    ParityMismatch,
    PoleAtBasePoint,
    TransversalityViolation,
    UnsupportedGenus,
    UnsupportedN,
)
from .exact.matrix import Matrix, block_matrix, span_contains, span_equal
from .exact.ratfunc import RationalFunction, as_rf
from .exact.series import TruncatedSeries

ORTHOGONAL = "orthogonal"
SYMPLECTIC = "symplectic"

_RF0 = RationalFunction.const(0)
_RF1 = RationalFunction.const(1)


def _rf_matrix(m) -> Matrix:
    if isinstance(m, Matrix):
        return m.map(lambda x: x if isinstance(x, RationalFunction) else as_rf(x))
    return Matrix([[as_rf(x) for x in row] for row in m])


@dataclass(frozen=True)
class BilinearForm:
    matrix: Matrix
    parity: str

    def __post_init__(self):
        m = _rf_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not m.is_square():
            raise ArityMismatch(f"bilinear form must be square, got {m.shape}")
        if self.parity not in (ORTHOGONAL, SYMPLECTIC):
            raise ValueError(f"parity must be {ORTHOGONAL!r} or {SYMPLECTIC!r}")
        if self.parity == ORTHOGONAL and not m.is_symmetric():
            raise DegenerateForm("orthogonal form must be symmetric")
        if self.parity == SYMPLECTIC and not m.is_antisymmetric():
            raise DegenerateForm("symplectic form must be antisymmetric")
        if not m.det():
            raise DegenerateForm("bilinear form is degenerate (det = 0 in Q(z))")

    @property
    def rank(self) -> int:
        return self.matrix.nrows


@dataclass(frozen=True)
class Filtration:
    """E_1 < ... < E_n with E_i spanned by the columns of steps[i-1]."""

    steps: tuple
    r: int

    def __post_init__(self):
        steps = tuple(_rf_matrix(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        n = len(steps)
        if n == 0:
            raise ArityMismatch("filtration needs at least one step")
        m = steps[0].nrows
        if any(s.nrows != m for s in steps):
            raise ArityMismatch("filtration generators live in different ranks")
        if m != n * self.r:
            raise ArityMismatch(f"total rank {m} is not length {n} times step rank {self.r}")
        for i, s in enumerate(steps, start=1):
            if s.rank() != i * self.r:
                raise ArityMismatch(f"E_{i} has rank {s.rank()}, expected {i * self.r}")
            if i > 1 and not span_contains(s, steps[i - 2]):
                raise ArityMismatch(f"E_{i - 1} is not contained in E_{i}")

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def total_rank(self) -> int:
        return self.steps[0].nrows

    def step(self, i: int) -> Matrix:
        if not 1 <= i <= self.length:
            raise IndexOutOfRange(f"filtration index {i} outside 1..{self.length}")
        return self.steps[i - 1]

    @classmethod
    def standard(cls, n: int, r: int) -> "Filtration":
        """E_i spanned by the first i*r basis vectors."""
        m = n * r
        ident = Matrix.identity(m)
        return cls(tuple(ident.submatrix(0, m, 0, i * r) for i in range(1, n + 1)), r)

    def adapted_frame(self) -> Matrix:
        """Invertible g whose first i*r columns span E_i, by column reduction."""
        cols: list[list] = []
        current = None
        for s in self.steps:
            for c in s.columns():
                trial = Matrix.from_columns(cols + [c])
                if trial.rank() > len(cols):
                    cols.append(c)
                    current = trial
        return current


@dataclass(frozen=True)
class ConnectionMatrix:
    A: Matrix

    def __post_init__(self):
        a = _rf_matrix(self.A)
        object.__setattr__(self, "A", a)
        if not a.is_square():
            raise ArityMismatch(f"connection matrix must be square, got {a.shape}")

    @property
    def rank(self) -> int:
        return self.A.nrows

    def gauge(self, g: Matrix) -> Matrix:
        """Connection matrix in the frame g: g^-1 A g + g^-1 g'."""
        gi = g.inverse()
        return gi @ self.A @ g + gi @ g.derivative()


@dataclass(frozen=True)
class BOperData:
    form: BilinearForm
    filt: Filtration
    conn: ConnectionMatrix
    genus: int = 2
    deg_Q: int = 0
    base_point: Fraction = Fraction(0)
    q_conn: ConnectionMatrix | None = None
    strict: bool = True

    def __post_init__(self):
        object.__setattr__(self, "base_point", Fraction(self.base_point))
        if not (self.form.rank == self.filt.total_rank == self.conn.rank):
            raise ArityMismatch(
                f"ranks disagree: form {self.form.rank}, filtration {self.filt.total_rank}, connection {self.conn.rank}"
            )
        if self.strict and not parity_matches(self.form, self.filt.length):
            raise ParityMismatch(
                f"length {self.filt.length} filtration needs a "
                f"{SYMPLECTIC if self.filt.length % 2 == 0 else ORTHOGONAL} form, got {self.form.parity}"
            )

    @property
    def n(self) -> int:
        return self.filt.length

    @property
    def r(self) -> int:
        return self.filt.r


def parity_matches(form: BilinearForm, n: int) -> bool:
    return (form.parity == SYMPLECTIC) == (n % 2 == 0)


# linear algebra against the form ---------------------------------------------------

def perp(F: Matrix, form: BilinearForm) -> Matrix:
    """Generators of {w : w^T B f = 0 for all f in F}."""
    B = form.matrix
    if not B.det():
        raise DegenerateForm("perp needs a non-degenerate form")
    F = _rf_matrix(F)
    basis = (F.T @ B.T).nullspace()
    if not basis:
        return Matrix([[] for _ in range(B.nrows)])
    return Matrix.from_columns(basis)


def check_b_connection(conn: ConnectionMatrix, form: BilinearForm) -> tuple[bool, Matrix]:
    B, A = form.matrix, conn.A
    if A.shape != B.shape:
        raise ArityMismatch(f"connection {A.shape} and form {B.shape} differ in rank")
    residual = B.derivative() - A.T @ B - B @ A
    return residual.is_zero(), residual


def check_b_filtration(filt: Filtration, form: BilinearForm) -> bool:
    n = filt.length
    if not parity_matches(form, n):
        return False
    for i in range(1, n):
        if not span_equal(perp(filt.step(i), form), filt.step(n - i)):
            return False
    return True


# adapted frames and second fundamental forms ------------------------------------------

@dataclass(frozen=True)
class AdaptedData:
    g: Matrix
    A: Matrix
    B: Matrix
    n: int
    r: int

    def block_A(self, i: int, j: int) -> Matrix:
        return self.A.block(i, j, self.r)

    def block_B(self, i: int, j: int) -> Matrix:
        return self.B.block(i, j, self.r)


def adapt(conn: ConnectionMatrix, filt: Filtration, form: BilinearForm | None = None) -> AdaptedData:
    g = filt.adapted_frame()
    A = conn.gauge(g)
    B = (g.T @ form.matrix @ g) if form is not None else None
    return AdaptedData(g, A, B, filt.length, filt.r)


def transversality_levels(ad: AdaptedData) -> list[bool]:
    """Entry i-1 says whether D(E_i) lies in E_{i+1} (blocks below the subdiagonal vanish)."""
    out = []
    for i in range(1, ad.n + 1):
        out.append(all(ad.block_A(p, i).is_zero() for p in range(i + 2, ad.n + 1)))
    return out


def second_fundamental_form(conn: ConnectionMatrix, filt: Filtration, i: int, adapted: AdaptedData | None = None) -> Matrix:
    """S_i : E_i/E_{i-1} -> E_{i+1}/E_i, the (i+1, i) block in an adapted frame."""
    if not 1 <= i < filt.length:
        raise IndexOutOfRange(f"second fundamental form index {i} outside 1..{filt.length - 1}")
    ad = adapted or adapt(conn, filt)
    if not transversality_levels(ad)[i - 1]:
        raise TransversalityViolation(f"D maps E_{i} outside E_{i + 1}")
    return ad.block_A(i + 1, i)


def witness_points(z0: Fraction):
    yield Fraction(z0)
    k = 1
    while True:
        if Fraction(k) != z0:
            yield Fraction(k)
        k += 1


def evaluate_witness(f: RationalFunction, z0: Fraction, tries: int = 64) -> tuple[Fraction, Fraction]:
    """(point, value) at the first regular point among z0, 1, 2, 3, ..."""
    for k, pt in enumerate(witness_points(z0)):
        if k >= tries:
            break
        if f.is_regular_at(pt):
            return pt, f(pt)
    raise PoleAtBasePoint(f"no regular witness point found for {f}")


def evaluate_matrix_witness(m: Matrix, z0: Fraction, tries: int = 64) -> tuple[Fraction, Matrix]:
    for k, pt in enumerate(witness_points(z0)):
        if k >= tries:
            break
        if all(e.is_regular_at(pt) for e in m.entries()):
            return pt, m.evaluate(pt)
    raise PoleAtBasePoint("no regular witness point found")


def fiberwise_invertible(m: Matrix, z0: Fraction) -> tuple[bool, str]:
    d = m.det()
    if not d:
        return False, "det = 0 in Q(z)"
    pt, val = evaluate_witness(d, z0)
    if not val:
        return False, f"det vanishes at z = {pt}"
    return True, f"det = {d}; value {val} at z = {pt}"


# the symmetric form on Q* --------------------------------------------------------------

@dataclass(frozen=True)
class SPrimeResult:
    s_prime: Matrix
    form_matrix: Matrix
    symmetric: bool
    nondegenerate: bool

    @property
    def ok(self) -> bool:
        return self.symmetric and self.nondegenerate


def s_prime_form(data: BOperData, adapted: AdaptedData | None = None) -> SPrimeResult:
    """Compose S_{n-1} ... S_1 and read it as a bilinear form on Q*.

    With G the pairing E_1 x E/E_{n-1} and H the pairing E/E_{n-1} x E_1
    induced by B, the form is G^-1 (S'^T H) G^-T.  This normalization gives
    [1] for the length-2 companion oper.
    """
    ad = adapted or adapt(data.conn, data.filt, data.form)
    n, r = ad.n, ad.r
    smat = Matrix.identity(r)
    for i in range(1, n):
        s_i = second_fundamental_form(data.conn, data.filt, i, ad)
        if not s_i.det():
            raise NonInvertibleStep(f"S_{i} is not invertible")
        smat = s_i @ smat
    G = ad.block_B(1, n)
    H = ad.block_B(n, 1)
    if not G.det():
        raise DegenerateForm("B does not pair E_1 with E/E_{n-1}")
    Gi = G.inverse()
    form = Gi @ (smat.T @ H) @ Gi.T
    ok_nd, _ = fiberwise_invertible(form, data.base_point)
    return SPrimeResult(smat, form, form.is_symmetric(), ok_nd)


# series-level identities ---------------------------------------------------------------

def _series_vec(v: Sequence, z0: Fraction, N: int) -> list[TruncatedSeries]:
    out = []
    for x in v:
        if isinstance(x, TruncatedSeries):
            out.append(x)
        else:
            out.append(TruncatedSeries.from_rf(as_rf(x), z0, N))
    return out


def _pair(Bs: Matrix, s: Sequence, t: Sequence) -> TruncatedSeries:
    acc = s[0] * 0
    for i, si in enumerate(s):
        if not si:
            continue
        row = Bs.rows[i]
        for j, tj in enumerate(t):
            if row[j] and tj:
                acc = acc + si * row[j] * tj
    return acc


def apply_V(As: Matrix, s: Sequence) -> list[TruncatedSeries]:
    """V(s) = s' + A s, the connection contracted with d/dz."""
    ds = [x.derivative() for x in s]
    As_s = As.apply(s)
    return [a + b for a, b in zip(ds, As_s)]


def v_identity_check(data: BOperData, s: Sequence, t: Sequence, N: int) -> tuple[bool, TruncatedSeries]:
    """B(V^{n-1}s, t) + (-1)^(n-2) B(s, V^{n-1}t) vanishes for s, t in E_1."""
    n = data.n
    if N < n + 1:
        raise InsufficientOrder(f"series order {N} too small for length {n}")
    z0 = data.base_point
    s = _series_vec(s, z0, N)
    t = _series_vec(t, z0, N)
    As = data.conn.A.to_series(z0, N)
    Bs = data.form.matrix.to_series(z0, N)
    vs, vt = s, t
    for _ in range(n - 1):
        vs = apply_V(As, vs)
        vt = apply_V(As, vt)
    total = _pair(Bs, vs, t) + _pair(Bs, s, vt) * (-1) ** (n - 2)
    keep = N - (n - 1)
    total = total.truncate(min(keep, total.order))
    return total.is_zero(), total


def lemma_v_residual(form: BilinearForm, conn: ConnectionMatrix, s: Sequence, t: Sequence, z0, N: int) -> TruncatedSeries:
    """B(Vs, t) + B(s, Vt) - B(s, t)' as a series."""
    z0 = Fraction(z0)
    s = _series_vec(s, z0, N)
    t = _series_vec(t, z0, N)
    As = conn.A.to_series(z0, N)
    Bs = form.matrix.to_series(z0, N)
    return _pair(Bs, apply_V(As, s), t) + _pair(Bs, s, apply_V(As, t)) - _pair(Bs, s, t).derivative()


# validation report ------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    residual: str = ""


@dataclass
class Report:
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, residual: str = "") -> None:
        self.checks.append(Check(name, bool(passed), residual))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def _fmt_matrix(m: Matrix) -> str:
    return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in m.rows) + "]"


def validate_boper(data: BOperData, N: int | None = None) -> Report:
    n, r = data.n, data.r
    N = 2 * n + 2 if N is None else N
    rep = Report()

    ok, res = check_b_connection(data.conn, data.form)
    rep.add("b_connection", ok, "0" if ok else _fmt_matrix(res))

    par = parity_matches(data.form, n)
    rep.add("parity", par, "" if par else f"length {n} with {data.form.parity} form")
    filt_ok = par and check_b_filtration(data.filt, data.form)
    rep.add("b_filtration", filt_ok, "" if filt_ok else "E_i^perp != E_{n-i}")

    ad = adapt(data.conn, data.filt, data.form)
    levels = transversality_levels(ad)
    trans_ok = all(levels)
    bad = [i + 1 for i, v in enumerate(levels) if not v]
    rep.add("transversality", trans_ok, "" if trans_ok else f"fails at levels {bad}")

    sff_ok = trans_ok
    notes = []
    if trans_ok:
        for i in range(1, n):
            s_i = ad.block_A(i + 1, i)
            inv, note = fiberwise_invertible(s_i, data.base_point)
            notes.append(f"S_{i}: {note}")
            sff_ok = sff_ok and inv
    else:
        notes.append("skipped: transversality fails")
    rep.add("sff_isomorphism", sff_ok, "; ".join(notes))

    sp = None
    if sff_ok:
        try:
            sp = s_prime_form(data, ad)
        except (DegenerateForm, NonInvertibleStep) as exc:
            rep.add("s_form_symmetric", False, f"skipped: {exc}")
            rep.add("s_form_nondegenerate", False, f"skipped: {exc}")
    if sp is not None:
        rep.add("s_form_symmetric", sp.symmetric, _fmt_matrix(sp.form_matrix))
        rep.add("s_form_nondegenerate", sp.nondegenerate, str(sp.form_matrix.det()))
        rep.data["s_form"] = sp.form_matrix
    elif not sff_ok:
        rep.add("s_form_symmetric", False, "skipped: some S_i not invertible")
        rep.add("s_form_nondegenerate", False, "skipped: some S_i not invertible")

    v_ok = True
    worst = ""
    e1 = data.filt.step(1).columns()
    try:
        for s in e1:
            for t in e1:
                good, total = v_identity_check(data, s, t, N)
                if not good:
                    v_ok, worst = False, str(total)
    except (PoleAtBasePoint, InsufficientOrder) as exc:
        v_ok, worst = False, str(exc)
    rep.add("v_identity", v_ok, "0" if v_ok else worst)
    if not ok and not rep.get("s_form_symmetric").passed:
        rep.data["root_cause"] = "b_connection"
    return rep


# Higgs field ----------------------------------------------------------------------------

@dataclass(frozen=True)
class HiggsData:
    n: int
    r: int
    g: int
    deg_Q: int
    phi: Matrix
    graded_degrees: tuple
    stable: bool
    char_poly: tuple
    char_poly_ok: bool
    nilpotent: bool


def higgs_field(blocks: Sequence[Matrix], r: int) -> Matrix:
    n = len(blocks) + 1
    zero = Matrix.zeros(r, r)
    rows = []
    for p in range(1, n + 1):
        rows.append([blocks[q - 1] if p == q + 1 else zero for q in range(1, n + 1)])
    return block_matrix(rows)


def graded_degrees(n: int, r: int, g: int, deg_Q: int) -> tuple[int, ...]:
    """deg(E_{i+1}/E_i) = deg(Q (x) K^(n-1-i)), i = 0..n-1."""
    return tuple(deg_Q + r * (n - 1 - i) * (2 * g - 2) for i in range(n))


def higgs_from_phi(phi: Matrix, n: int, r: int, g: int, deg_Q: int) -> HiggsData:
    cp = phi.char_poly()
    m = n * r
    cp_ok = all(not c for c in cp[:m]) and cp[m] == 1
    nil = (phi ** n).is_zero()
    return HiggsData(
        n, r, g, deg_Q, phi, graded_degrees(n, r, g, deg_Q), n > 1 and g > 1, tuple(cp), cp_ok, nil
    )


def higgs_from_boper(data: BOperData) -> HiggsData:
    ad = adapt(data.conn, data.filt, data.form)
    blocks = [second_fundamental_form(data.conn, data.filt, i, ad) for i in range(1, data.n)]
    phi = higgs_field(blocks, data.r)
    return higgs_from_phi(phi, data.n, data.r, data.genus, data.deg_Q)


def invariant_graded_pieces(phi: Matrix, n: int, r: int) -> list[int]:
    """Indices i (1-based) with Phi(gr_i) contained in gr_i."""
    out = []
    for i in range(1, n + 1):
        ok = all(phi.block(p, i, r).is_zero() for p in range(1, n + 1) if p != i)
        if ok:
            out.append(i)
    return out


# degree and moduli arithmetic --------------------------------------------------------------

@dataclass(frozen=True)
class DegreeData:
    deg_det_Ei: int
    slope_E: Fraction
    slope_Q: Fraction
    gap: Fraction


def degree_and_slope(n: int, r: int, g: int, deg_Q: int, i: int) -> DegreeData:
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"index {i} outside 1..{n}")
    if n < 1 or r < 1:
        raise IndexOutOfRange("n and r must be positive")

    def deg_det(k: int) -> int:
        return k * deg_Q + r * (n * k - k * (k + 1) // 2) * (2 * g - 2)

    slope_E = Fraction(deg_det(n), n * r)
    slope_Q = Fraction(deg_Q, r)
    return DegreeData(deg_det(i), slope_E, slope_Q, slope_E - slope_Q)


@dataclass(frozen=True)
class ModuliDimension:
    dim_C: int
    dim_P: int
    dim_sum: int
    total: int


def moduli_dimension(n: int, r: int, g: int) -> ModuliDimension:
    if n < 2 or n == 3:
        raise UnsupportedN(f"n = {n} is not covered (need n >= 2, n != 3)")
    if g < 2:
        raise UnsupportedGenus(f"genus {g} < 2")
    if r < 1:
        raise ArityMismatch("rank must be positive")
    dim_P = 3 * g - 3
    dim_sum = sum((4 * i - 1) * (g - 1) for i in range(2, n // 2 + 1))
    dim_C = 0 if r == 1 else (g - 1) * r * (r - 1)
    return ModuliDimension(dim_C, dim_P, dim_sum, dim_C + dim_P + dim_sum)
