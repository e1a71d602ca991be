"""Independent reference implementations used only by the tests."""

import itertools
import random
from fractions import Fraction

import sympy as sp

from opercalc.diffop import TensorComponents, WeightedDiffOp, recompose
from opercalc.exact import Poly, RationalFunction

Z = sp.Symbol("z")


def to_sympy(f: RationalFunction):
    num = sum(sp.Rational(c.numerator, c.denominator) * Z**k for k, c in enumerate(f.num.coeffs))
    den = sum(sp.Rational(c.numerator, c.denominator) * Z**k for k, c in enumerate(f.den.coeffs))
    return num / den


def from_sympy(expr) -> RationalFunction:
    num, den = sp.fraction(sp.cancel(sp.together(expr)))

    def poly(e):
        coeffs = sp.Poly(e, Z).all_coeffs()[::-1]
        return Poly([Fraction(int(sp.numer(c)), int(sp.denom(c))) for c in coeffs])

    return RationalFunction(poly(num), poly(den))


def leibniz_transpose(coeffs):
    """Coefficients of t -> sum_k (-1)^k d^k(a_k t), by sympy expansion."""
    t = sp.Function("t")(Z)
    n = len(coeffs) - 1
    expr = sum((-1) ** k * sp.diff(to_sympy(a) * t, Z, k) for k, a in enumerate(coeffs))
    expr = sp.expand(expr)
    syms = sp.symbols(f"d0:{n + 1}")
    for i in range(n, 0, -1):
        expr = expr.subs(sp.Derivative(t, (Z, i)), syms[i])
    expr = expr.subs(t, syms[0])
    return [from_sympy(sp.expand(expr).coeff(syms[i])) for i in range(n + 1)]


def sympy_schwarzian(phi):
    f = to_sympy(phi)
    d1, d2, d3 = (sp.diff(f, Z, k) for k in (1, 2, 3))
    return from_sympy(d3 / d1 - sp.Rational(3, 2) * (d2 / d1) ** 2)


def pairing_bruteforce(d: int, a: int, b: int) -> Fraction:
    """<e1^(d-a) e2^a, e1^(d-b) e2^b> averaged over permutations of one argument."""
    base = {(0, 1): 1, (1, 0): -1}
    v = [0] * (d - a) + [1] * a
    w = [0] * (d - b) + [1] * b
    total = 0
    count = 0
    for perm in itertools.permutations(range(d)):
        prod = 1
        for i in range(d):
            prod *= base.get((v[i], w[perm[i]]), 0)
            if not prod:
                break
        total += prod
        count += 1
    return Fraction(total, count)


def random_poly_rf(rng: random.Random, deg: int) -> RationalFunction:
    return RationalFunction(Poly([Fraction(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(deg + 1)]))


def random_operator(rng: random.Random, max_order: int = 6, max_deg: int = 4) -> WeightedDiffOp:
    n = rng.randint(1, max_order)
    return WeightedDiffOp([random_poly_rf(rng, rng.randint(0, max_deg)) for _ in range(n + 1)])


def random_sl_operator(rng: random.Random, n: int, odd_zero: bool, max_deg: int = 3) -> WeightedDiffOp:
    comps = [RationalFunction.const(1), RationalFunction.const(0)]
    for j in range(2, n + 1):
        if j % 2 == 1 and odd_zero:
            comps.append(RationalFunction.const(0))
        else:
            comps.append(random_poly_rf(rng, rng.randint(0, max_deg)))
    return recompose(TensorComponents(n, tuple(comps)))


def random_moebius(rng: random.Random) -> RationalFunction:
    while True:
        a, b, c, d = (rng.randint(-3, 3) for _ in range(4))
        if a * d - b * c:
            return RationalFunction(Poly([b, a]), Poly([d, c]))
