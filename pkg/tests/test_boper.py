import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_poly_rf
from opercalc.boper import (
    ORTHOGONAL,
    SYMPLECTIC,
    BilinearForm,
    BOperData,
    ConnectionMatrix,
    Filtration,
    check_b_connection,
    check_b_filtration,
    degree_and_slope,
    graded_degrees,
    higgs_from_boper,
    higgs_from_phi,
    invariant_graded_pieces,
    lemma_v_residual,
    moduli_dimension,
    perp,
    s_prime_form,
    second_fundamental_form,
    v_identity_check,
    validate_boper,
)
from opercalc.diffop import TensorComponents, WeightedDiffOp, recompose
from opercalc.errors import (
    DegenerateForm,
    IndexOutOfRange,
    ParityMismatch,
    TransversalityViolation,
    UnsupportedGenus,
    UnsupportedN,
)
from opercalc.exact import Matrix, RationalFunction, TruncatedSeries, parse_rf, rf_matrix, span_equal
from opercalc.jets import ScalarOperBundle, build_boper_from_parts

P = parse_rf
J2 = [["0", "1"], ["-1", "0"]]


def sym_form(r):
    return BilinearForm(Matrix.identity(r), ORTHOGONAL)


def n2_data(q="z^2 + 1"):
    return build_boper_from_parts(ScalarOperBundle.trivial(WeightedDiffOp([q, 0, 1])))


def n4r2_data():
    oper = recompose(TensorComponents(4, (P("1"), P("0"), P("z"), P("0"), P("z^2 + 1"))))
    W = ScalarOperBundle(oper, sym_form(2), ConnectionMatrix(rf_matrix([["0", "z"], ["-z", "0"]])))
    return build_boper_from_parts(W)


def test_perp_examples():
    e1 = rf_matrix([["1"], ["0"]])
    assert span_equal(perp(e1, sym_form(2)), rf_matrix([["0"], ["1"]]))
    symp = BilinearForm(rf_matrix(J2), SYMPLECTIC)
    assert span_equal(perp(e1, symp), e1)


def test_perp_needs_nondegenerate_form():
    with pytest.raises(DegenerateForm):
        BilinearForm(rf_matrix([["1", "1"], ["1", "1"]]), ORTHOGONAL)
    with pytest.raises(DegenerateForm):
        BilinearForm(rf_matrix([["1", "2"], ["3", "1"]]), ORTHOGONAL)


def random_form(rng, m, parity):
    while True:
        rows = [[RationalFunction.const(0)] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                x = random_poly_rf(rng, rng.randint(0, 1))
                if parity == SYMPLECTIC:
                    if i != j:
                        rows[i][j], rows[j][i] = x, -x
                else:
                    rows[i][j] = rows[j][i] = x
        M = Matrix(rows)
        if M.det():
            return BilinearForm(M, parity)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_perp_involution_and_rank(seed):
    rng = random.Random(seed)
    parity = rng.choice([ORTHOGONAL, SYMPLECTIC])
    m = rng.choice([2, 4, 6]) if parity == SYMPLECTIC else rng.randint(1, 6)
    form = random_form(rng, m, parity)
    k = rng.randint(1, m)
    F = Matrix([[random_poly_rf(rng, 1) for _ in range(k)] for _ in range(m)])
    if F.rank() == 0:
        return
    Fp = perp(F, form)
    Fp_rank = Fp.rank() if Fp.ncols else 0
    assert F.rank() + Fp_rank == m
    if Fp_rank:
        assert span_equal(perp(Fp, form), F)


def test_perp_double_rank1_in_rank4():
    rng = random.Random(1)
    form = random_form(rng, 4, ORTHOGONAL)
    F = Matrix([[random_poly_rf(rng, 2)] for _ in range(4)])
    assert span_equal(perp(perp(F, form), form), F)


def test_check_b_connection_examples():
    I2 = sym_form(2)
    ok, res = check_b_connection(ConnectionMatrix(rf_matrix([["0", "z"], ["-z", "0"]])), I2)
    assert ok and res.is_zero()
    ok, res = check_b_connection(ConnectionMatrix(Matrix.identity(2)), I2)
    assert not ok
    assert res == Matrix.identity(2) * (-2)
    B = BilinearForm(rf_matrix([["1", "0"], ["0", "z"]]), ORTHOGONAL)
    ok, _ = check_b_connection(ConnectionMatrix(rf_matrix([["0", "0"], ["0", "1/(2*z)"]])), B)
    assert ok


def test_check_b_filtration_examples():
    symp = BilinearForm(rf_matrix(J2), SYMPLECTIC)
    filt = Filtration((rf_matrix([["1"], ["0"]]), Matrix.identity(2)), 1)
    assert check_b_filtration(filt, symp)
    filt2 = Filtration((rf_matrix([["1"], ["1"]]), Matrix.identity(2)), 1)
    assert check_b_filtration(filt2, symp)
    J6 = Matrix([[RationalFunction.const(1 if j == 5 - i else 0) * (1 if i < 3 else -1) for j in range(6)] for i in range(6)])
    assert not check_b_filtration(Filtration.standard(3, 2), BilinearForm(J6, SYMPLECTIC))


def test_filtration_rejects_bad_steps():
    with pytest.raises(Exception):
        Filtration((rf_matrix([["1"], ["0"]]), rf_matrix([["0"], ["1"]])), 1)


def test_second_fundamental_form_examples():
    filt = Filtration.standard(2, 1)
    A = ConnectionMatrix(rf_matrix([["0", "z"], ["1", "0"]]))
    assert second_fundamental_form(A, filt, 1) == rf_matrix([["1"]])
    U = ConnectionMatrix(rf_matrix([["1", "z"], ["0", "2"]]))
    assert second_fundamental_form(U, filt, 1) == rf_matrix([["0"]])
    with pytest.raises(IndexOutOfRange):
        second_fundamental_form(A, filt, 2)


def test_transversality_violation():
    filt = Filtration.standard(3, 1)
    A = ConnectionMatrix(rf_matrix([["0", "0", "0"], ["1", "0", "0"], ["1", "1", "0"]]))
    with pytest.raises(TransversalityViolation):
        second_fundamental_form(A, filt, 1)


def test_second_fundamental_form_independent_of_lift():
    data = n2_data()
    f1, f2 = data.filt.step(2).columns()
    h = P("z^3 - 1/(z + 4)")
    moved = Filtration((data.filt.step(1), Matrix.from_columns([f1, [a + h * b for a, b in zip(f2, f1)]])), 1)
    s_orig = second_fundamental_form(data.conn, data.filt, 1)
    s_moved = second_fundamental_form(data.conn, moved, 1)
    assert s_orig == s_moved


def test_validate_builder_n2():
    rep = validate_boper(n2_data())
    assert rep.passed, [(c.name, c.residual) for c in rep.checks if not c.passed]


def test_validate_wrong_parity():
    data = n2_data()
    with pytest.raises(ParityMismatch):
        BOperData(sym_form(2), data.filt, data.conn)
    loose = BOperData(sym_form(2), data.filt, data.conn, strict=False)
    rep = validate_boper(loose)
    assert not rep.get("parity").passed
    assert not rep.passed


def test_validate_zero_subdiagonal():
    data = n2_data()
    A = data.conn.A
    g = data.filt.adapted_frame()
    At = g.inverse() @ A @ g
    upper = Matrix([[At[0, 0], At[0, 1]], [RationalFunction.const(0), At[1, 1]]])
    broken = BOperData(data.form, data.filt, ConnectionMatrix(g @ upper @ g.inverse()))
    rep = validate_boper(broken)
    assert not rep.get("sff_isomorphism").passed
    assert not rep.passed


def test_s_prime_form_n2_is_one():
    sp = s_prime_form(n2_data())
    assert sp.form_matrix == rf_matrix([["1"]])
    assert sp.ok


def test_s_prime_form_n4_r2():
    sp = s_prime_form(n4r2_data())
    assert sp.form_matrix.shape == (2, 2)
    assert sp.symmetric and sp.form_matrix.det() != 0


def test_garbage_connection_flags_root_cause():
    data = n4r2_data()
    A = data.conn.A
    bumped = Matrix([[A[i, j] + (P("z") if (i, j) == (0, 0) else 0) for j in range(A.ncols)] for i in range(A.nrows)])
    rep = validate_boper(BOperData(data.form, data.filt, ConnectionMatrix(bumped)))
    assert not rep.get("b_connection").passed
    assert not rep.passed


def test_v_identity_examples():
    data = n2_data()
    e1 = data.filt.step(1).col(0)
    ok, total = v_identity_check(data, e1, e1, 6)
    assert ok and total.is_zero()
    flat = BOperData(BilinearForm(rf_matrix(J2), SYMPLECTIC), Filtration.standard(2, 1), ConnectionMatrix(Matrix.zeros(2, 2)))
    ok, _ = v_identity_check(flat, [1, 0], [1, 0], 5)
    assert ok


def test_lemma_v_cross_validates_b_connection():
    rng = random.Random(9)
    data = n4r2_data()
    m = data.form.rank
    good = data.conn
    A = data.conn.A
    bad = ConnectionMatrix(Matrix([[A[i, j] + (1 if i == j == 0 else 0) for j in range(m)] for i in range(m)]))
    for conn in (good, bad):
        b_ok, _ = check_b_connection(conn, data.form)
        res_zero = True
        for _ in range(3):
            s = [TruncatedSeries(0, [rng.randint(-3, 3) for _ in range(6)]) for _ in range(m)]
            t = [TruncatedSeries(0, [rng.randint(-3, 3) for _ in range(6)]) for _ in range(m)]
            res_zero = res_zero and lemma_v_residual(data.form, conn, s, t, 0, 5).is_zero()
        assert b_ok == res_zero


def test_validated_data_satisfies_invariants():
    for data in (n2_data(), n4r2_data()):
        rep = validate_boper(data)
        assert rep.passed
        sp = s_prime_form(data)
        assert sp.form_matrix.is_symmetric() and sp.form_matrix.det()


def test_higgs_n2():
    data = build_boper_from_parts(ScalarOperBundle.trivial(WeightedDiffOp(["z", 0, 1])), g=3, deg_Q=-2)
    h = higgs_from_boper(data)
    assert h.graded_degrees == (2, -2)
    assert h.char_poly_ok and h.nilpotent
    assert list(h.char_poly) == [0, 0, 1]


def test_higgs_n4_r2():
    h = higgs_from_boper(n4r2_data())
    assert h.char_poly_ok and h.nilpotent and h.stable
    assert invariant_graded_pieces(h.phi, 4, 2) == [4]


def test_higgs_detects_diagonal_block():
    h = higgs_from_boper(n4r2_data())
    phi = h.phi
    poked = Matrix([[phi[i, j] + (1 if i == j == 0 else 0) for j in range(8)] for i in range(8)])
    bad = higgs_from_phi(poked, 4, 2, 2, 0)
    assert not bad.char_poly_ok


def test_degree_examples():
    d = degree_and_slope(4, 2, 2, 0, 4)
    assert d.deg_det_Ei == 24 and d.gap == 3
    d = degree_and_slope(2, 1, 2, -1, 1)
    assert d.deg_det_Ei == 1
    with pytest.raises(IndexOutOfRange):
        degree_and_slope(2, 1, 2, 0, 3)


def test_degree_grid():
    for n in range(2, 9):
        for r in range(1, 4):
            for g in range(0, 5):
                for dq in range(-2, 3):
                    d = degree_and_slope(n, r, g, dq, n)
                    assert d.gap == (n - 1) * (g - 1)
                    assert d.deg_det_Ei == sum(graded_degrees(n, r, g, dq))


def test_moduli_examples():
    m = moduli_dimension(2, 1, 2)
    assert (m.dim_sum, m.dim_P, m.total) == (0, 3, 3)
    m = moduli_dimension(4, 1, 2)
    assert (m.dim_sum, m.total) == (7, 10)
    m = moduli_dimension(5, 2, 3)
    assert (m.dim_C, m.dim_P, m.dim_sum, m.total) == (4, 6, 14, 24)
    with pytest.raises(UnsupportedN):
        moduli_dimension(3, 1, 2)
    with pytest.raises(UnsupportedN):
        moduli_dimension(1, 1, 2)
    with pytest.raises(UnsupportedGenus):
        moduli_dimension(4, 1, 1)
