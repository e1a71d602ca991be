import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    leibniz_transpose,
    pairing_bruteforce,
    random_moebius,
    random_operator,
    random_poly_rf,
    random_sl_operator,
    sympy_schwarzian,
)
from opercalc.diffop import (
    OperClass,
    TensorComponents,
    WeightedDiffOp,
    adjoint,
    apply,
    classify,
    compose,
    decompose,
    formal_transpose,
    lift,
    pullback,
    recompose,
    schwarzian,
    sym_power_gram,
    sym_power_pairing,
    symbol,
)
from opercalc.errors import ArityMismatch, InsufficientOrder, SingularChange, WeightMismatch
from opercalc.exact import TruncatedSeries, parse_rf

P = parse_rf
Op = WeightedDiffOp


def test_apply_examples():
    assert apply(Op(["z", 0, 1]), P("z^2")) == P("z^3 + 2")
    assert apply(Op([0, 1], 0, 1), P("5")) == 0
    assert apply(Op(["-1", "z"], 0, 0), P("z")) == 0


def test_apply_series_truncates():
    s = TruncatedSeries.from_rf(P("1/(1-z)"), 0, 5)
    out = apply(Op([0, 0, 1]), s)
    assert out.order == 3
    assert out.coeffs == (2, 6, 12, 20)
    with pytest.raises(InsufficientOrder):
        apply(Op([0, 0, 1]), TruncatedSeries(0, [1, 1]))


def test_compose_examples():
    d = Op([0, 1], 0, 1)
    assert compose(d, Op([0, 1], -1, 0)) == Op([0, 0, 1], -1, 1)
    assert compose(Op([0, 1], 0, 1), Op(["z"], 0, 0)) == Op([1, "z"], 0, 1)
    D = Op(["z", "1/z", 1])
    ident = Op([1], D.source_weight, D.source_weight)
    assert compose(D, ident) == D
    with pytest.raises(WeightMismatch):
        compose(Op([0, 1], 0, 1), Op([0, 1], 0, 1))


def test_compose_matches_sequential_application():
    rng = random.Random(11)
    for _ in range(20):
        a = random_operator(rng, 3, 3)
        b = Op([random_poly_rf(rng, 2) for _ in range(rng.randint(1, 3))], 0, a.source_weight)
        s = P("(z^3 + 2) / (z - 5)")
        assert apply(compose(a, b), s) == apply(a, apply(b, s))


def test_symbol():
    assert symbol(Op(["7", "z", 1])) == 1
    assert symbol(Op([0, 0, 0, 0, "z^3"])) == P("z^3")


def test_adjoint_examples():
    assert adjoint(Op([0, 0, 1])) == Op([0, 0, 1])
    assert adjoint(Op([0, "z"])) == Op([1, "z"])
    q = P("z^3 - 1/(z+2)")
    assert adjoint(Op([q, 0, 1])) == Op([q, 0, 1])
    with pytest.raises(WeightMismatch):
        adjoint(Op([0, 1], 0, 0))


def test_transpose_against_sympy_oracle():
    rng = random.Random(5)
    for _ in range(15):
        D = random_operator(rng, 5, 3)
        assert list(formal_transpose(D).coeffs) == leibniz_transpose(D.coeffs)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_adjoint_is_involution(seed):
    D = random_operator(random.Random(seed))
    assert adjoint(adjoint(D)) == D
    assert symbol(adjoint(D)) == symbol(D)


def test_pullback_examples():
    assert pullback(Op([1, 0, 1]), P("2*z")) == Op([4, 0, 1])
    for phi in ["1/z", "(2*z + 1)/(z + 3)", "(z - 1)/(z + 1)"]:
        assert pullback(Op([0, 0, 1]), P(phi)) == Op([0, 0, 1])
    D = Op(["z^2", "z", "3", 1])
    assert pullback(D, P("z")) == D
    with pytest.raises(SingularChange):
        pullback(D, P("5"))
    with pytest.raises(SingularChange):
        pullback(D, TruncatedSeries(0, [0, 0, 1, 0]))


def test_pullback_transforms_solutions():
    # kernel of d^2 - 2/z^2 is spanned by z^2 and 1/z
    D = Op(["-2/z^2", 0, 1])
    for s in (P("z^2"), P("1/z")):
        # phi = 2z: phi'^(-1/2) is a constant, which does not affect the kernel
        assert apply(pullback(D, P("2*z")), s(P("2*z"))) == 0
        # phi = 1/z: phi'^(-1/2) = z up to a constant factor
        assert apply(pullback(D, P("1/z")), P("z") * s(P("1/z"))) == 0


def test_schwarzian_matches_sympy():
    for phi in ["z^3 + z", "1/(z^2 + 1)", "(z^2 + 3)/(z - 2)", "(2*z + 1)/(z + 3)"]:
        f = P(phi)
        assert schwarzian(f) == sympy_schwarzian(f)
    assert schwarzian(P("(2*z + 1)/(z + 3)")) == 0


def test_pullback_n2_schwarzian_shift():
    q = P("z^2 + 1")
    phi = P("z^3 + z + 1")
    Dt = pullback(Op([q, 0, 1]), phi)
    d1 = phi.derivative()
    assert Dt.coeffs[0] == d1 * d1 * q(phi) + schwarzian(phi) * Fraction(1, 2)


def test_decompose_examples():
    q = P("z^3 - 2")
    assert decompose(Op([q, 0, 1])).components == (1, 0, q)
    assert decompose(Op([0, "z", 1])).components == (1, P("z"), Fraction(-1, 2))
    a, b = P("z^2 + 1"), P("z")
    assert decompose(Op([b, a, 0, 1])).components == (1, 0, a, b - a.derivative() / 2)


def test_lift_examples():
    assert lift(2, 1, P("z")) == Op([Fraction(1, 2), "z", 0])
    a = P("z^4")
    assert lift(3, 2, a) == Op([a.derivative() / 2, a, 0, 0])
    assert lift(4, 0, P("1")) == Op([0, 0, 0, 0, 1])


def test_recompose_examples():
    assert recompose(TensorComponents(4, (P("1"), P("0"), P("0"), P("0"), P("0")))) == Op([0, 0, 0, 0, 1])
    D = Op([1, 1, "z^2", 0, 1])
    assert recompose(decompose(D)) == D
    q = P("z^2 - z")
    assert recompose(TensorComponents(3, (P("1"), P("0"), q, P("0")))) == Op([q.derivative() / 2, q, 0, 1])
    with pytest.raises(ArityMismatch):
        recompose(TensorComponents(2, (P("1"), P("0"), P("0"))), 3)


def test_lift_parity():
    rng = random.Random(2)
    for n in range(1, 7):
        for j in range(n + 1):
            w = random_poly_rf(rng, 3) + P("1/(z - 3)")
            L = lift(n, j, w)
            assert adjoint(L) == L.scale((-1) ** j)
            assert L.coeffs[n - j] == w


def test_classify_examples():
    assert classify(Op(["z", 0, 1])) == OperClass.SP
    a = P("z^2 + 1")
    assert classify(Op([a.derivative() / 2, a, 0, 1])) == OperClass.SO
    assert classify(Op([a.derivative() / 2 + 1, a, 0, 1])) == OperClass.SL
    assert classify(Op([1, 0, 2])) == OperClass.NOT_OPER
    assert classify(Op([0, 1, 1])) == OperClass.GL
    assert classify(Op([0, 0, 0])) == OperClass.NOT_OPER


def test_classify_matches_self_adjointness_on_sl():
    rng = random.Random(8)
    for i in range(30):
        n = rng.randint(2, 6)
        D = random_sl_operator(rng, n, odd_zero=i % 2 == 0)
        tag = classify(D)
        assert (adjoint(D) == D) == (tag in (OperClass.SP, OperClass.SO))


def test_moebius_covariance():
    rng = random.Random(4)
    for n in (2, 3, 4):
        D = random_sl_operator(rng, n, odd_zero=False, max_deg=2)
        phi = random_moebius(rng)
        d1 = phi.derivative()
        comps = decompose(pullback(D, phi)).components
        w = decompose(D).components
        assert comps[0] == 1 and comps[1] == 0
        for j in range(2, n + 1):
            assert comps[j] == d1**j * w[j](phi)


def test_sym_power_pairing_examples():
    e1, e2 = [1, 0], [0, 1]
    assert sym_power_pairing(1, e1, e2) == 1
    assert sym_power_pairing(1, e2, e1) == -1
    assert sym_power_pairing(2, [1, 0, 0], [0, 0, 1]) == 1
    assert sym_power_pairing(2, [0, 0, 1], [1, 0, 0]) == 1
    assert sym_power_pairing(2, [1, 0, 0], [1, 0, 0]) == 0
    with pytest.raises(ArityMismatch):
        sym_power_pairing(2, [1, 0], [1, 0, 0])


def test_sym_power_gram_matches_bruteforce():
    for d in range(1, 6):
        G = sym_power_gram(d)
        for a in range(d + 1):
            for b in range(d + 1):
                assert G[a, b] == pairing_bruteforce(d, a, b)


def test_sym_power_parity_and_nondegeneracy():
    for d in range(1, 7):
        G = sym_power_gram(d)
        assert G.T == G * (-1) ** d
        assert G.det() != 0
