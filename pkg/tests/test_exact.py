import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opercalc.errors import DivisionByZero, InsufficientOrder, ParseError, PoleAtBasePoint
from opercalc.exact import (
    HalfInteger,
    Matrix,
    Poly,
    RationalFunction,
    TruncatedSeries,
    parse_rf,
    rf_matrix,
    series_solve_linear_ode,
    span_equal,
)
from opercalc.exact.matrix import series_matrix_inverse

P = parse_rf


def random_poly(rng, deg):
    return Poly([Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(deg + 1)])


def random_rf(rng, deg):
    den = random_poly(rng, rng.randint(0, 2))
    while den.is_zero():
        den = random_poly(rng, 1)
    return RationalFunction(random_poly(rng, deg), den)


fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(fractions, max_size=6).map(Poly)


def test_poly_basics():
    p = Poly([1, Fraction(-1, 2), 3])
    assert str(p) == "3*z^2 - 1/2*z + 1"
    assert p.degree == 2
    assert Poly().degree == -1
    assert p(2) == 12
    q, r = p.divmod(Poly([1, 1]))
    assert q * Poly([1, 1]) + r == p


def test_poly_taylor_shift():
    p = Poly([0, 0, 1])
    # z^2 at 3: 9 + 6t + t^2
    assert p.taylor(3) == [9, 6, 1]


def test_rf_derivative_example():
    f = P("z^2/(z+1)")
    assert f.derivative() == P("(z^2 + 2*z) / (z^2 + 2*z + 1)")
    # check by re-multiplying the quotient rule out by hand
    num = Poly([0, 2]) * Poly([1, 1]) - Poly([0, 0, 1])
    assert f.derivative() == RationalFunction(num, Poly([1, 1]) ** 2)


def test_rf_trivial_examples():
    assert P("1/z") * P("z") == 1
    p = P("3*z + 1/2")
    assert p + 0 == p


def test_rf_is_reduced_and_monic():
    f = P("(2*z^2 - 2) / (4*z - 4)")
    assert f.den == Poly([Fraction(1)])
    assert f == P("z/2 + 1/2")
    g = P("(z + 1) / (3*z - 6)")
    assert g.den.lead == 1
    assert str(g) == "(1/3*z + 1/3) / (z - 2)"


def test_rf_division_by_zero():
    with pytest.raises(DivisionByZero):
        P("z") / P("0")
    with pytest.raises(ZeroDivisionError):
        P("z") / 0


def test_parse_errors():
    for bad in ["", "z +", "(z", "w", "z ^ z", "1/0", "z $ 1"]:
        with pytest.raises(ParseError):
            parse_rf(bad)


def test_parse_accepts_common_forms():
    assert P("-z**2 + 3") == P("3 - z^2")
    assert P("z^-1") == P("1/z")
    assert P("(3*z^2 + 1/2) / (z + 1)") == RationalFunction(Poly([Fraction(1, 2), 0, 3]), Poly([1, 1]))


def test_leibniz_on_random_pairs():
    rng = random.Random(7)
    for _ in range(100):
        p = random_rf(rng, rng.randint(0, 6))
        q = random_rf(rng, rng.randint(0, 6))
        assert (p * q).derivative() == p.derivative() * q + p * q.derivative()


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys.filter(lambda p: not p.is_zero()))
def test_division_inverts_multiplication(a, b, c):
    if b.is_zero():
        b = Poly([1])
    p = RationalFunction(a, b)
    q = RationalFunction(c, b + 1) if not (b + 1).is_zero() else RationalFunction(c)
    if q.is_zero():
        return
    assert (p * q) / q == p


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_rf_string_roundtrip(a, b):
    if b.is_zero():
        return
    f = RationalFunction(a, b)
    assert parse_rf(str(f)) == f


def test_halfinteger():
    w = HalfInteger.of(Fraction(-3, 2))
    assert w.twice_value == -3
    assert str(w) == "-3/2"
    assert (w + HalfInteger(3)).value == 0
    with pytest.raises(ValueError):
        HalfInteger.of(Fraction(1, 3))


def test_series_from_rf_and_inverse():
    s = TruncatedSeries.from_rf(P("1/(1 - z)"), 0, 4)
    assert s.coeffs == (1, 1, 1, 1, 1)
    assert (s * TruncatedSeries.from_rf(P("1 - z"), 0, 4)) == TruncatedSeries.const(1, 0, 4)
    with pytest.raises(PoleAtBasePoint):
        TruncatedSeries.from_rf(P("1/z"), 0, 3)


def test_series_order_tracking():
    s = TruncatedSeries(0, [1, 2, 3, 4])
    t = TruncatedSeries(0, [1, 1])
    assert (s * t).order == 1
    assert s.derivative().order == 2
    assert s.derivative().coeffs == (2, 6, 12)
    with pytest.raises(InsufficientOrder):
        TruncatedSeries(0, [5]).derivative()


def test_series_at_shifted_point():
    s = TruncatedSeries.from_rf(P("z^2"), 3, 3)
    assert s.coeffs == (9, 6, 1, 0)
    assert s.jet(2) == [9, 6, 2]


def test_matrix_det_inverse_nullspace():
    m = rf_matrix([["z", "1"], ["1/z", "2"]])
    assert m.det() == P("(2*z^2 - 1)/z")
    assert m.inverse() @ m == Matrix.identity(2)
    n = rf_matrix([["1", "z"], ["2", "2*z"]])
    assert n.rank() == 1
    (v,) = n.nullspace()
    assert n.apply(v) == [0, 0]


def test_span_equal():
    f = rf_matrix([["1"], ["z"]])
    g = rf_matrix([["2*z"], ["2*z^2"]])
    h = rf_matrix([["1"], ["0"]])
    assert span_equal(f, g)
    assert not span_equal(f, h)


def test_char_poly_faddeev_leverrier():
    m = rf_matrix([["1", "2"], ["3", "4"]])
    assert m.char_poly() == [-2, -5, 1]
    nil = rf_matrix([["0", "0"], ["z", "0"]])
    assert nil.char_poly() == [0, 0, 1]


def test_series_matrix_inverse():
    m = rf_matrix([["1", "z"], ["z^2", "1 + z"]]).to_series(0, 5)
    mi = series_matrix_inverse(m)
    prod = m @ mi
    assert prod == Matrix.identity(2, TruncatedSeries.const(1, 0, 5))


def test_ode_zero_connection():
    psi = series_solve_linear_ode(Matrix.zeros(2, 2), 0, 3)
    assert psi == Matrix.identity(2, TruncatedSeries.const(1, 0, 3))


def test_ode_nilpotent_example():
    psi = series_solve_linear_ode(rf_matrix([["0", "0"], ["1", "0"]]), 0, 2)
    expected = Matrix([
        [TruncatedSeries(0, [1, 0, 0]), TruncatedSeries(0, [0, 0, 0])],
        [TruncatedSeries(0, [0, -1, 0]), TruncatedSeries(0, [1, 0, 0])],
    ])
    assert psi == expected


def test_ode_exponential():
    psi = series_solve_linear_ode(rf_matrix([["-1"]]), 0, 3)
    assert psi[0, 0].coeffs == (1, 1, Fraction(1, 2), Fraction(1, 6))


def test_ode_pole_rejected():
    with pytest.raises(PoleAtBasePoint):
        series_solve_linear_ode(rf_matrix([["1/z"]]), 0, 3)


def test_ode_identity_holds_coefficientwise():
    rng = random.Random(3)
    for _ in range(10):
        A = Matrix([[random_rf(rng, 2) for _ in range(3)] for _ in range(3)])
        z0 = Fraction(rng.randint(-3, 3))
        if any(not e.is_regular_at(z0) for e in A.entries()):
            continue
        N = 6
        psi = series_solve_linear_ode(A, z0, N)
        assert psi.coefficient(0) == Matrix.identity(3, Fraction(1))
        assert psi.coefficient(0).det() == 1
        lhs = psi.derivative()
        rhs = -(A.to_series(z0, N - 1) @ psi.map(lambda s: s.truncate(N - 1)))
        assert lhs == rhs
