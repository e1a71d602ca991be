"""Scalar holomorphic differential operators K^a -> K^b on a chart.

An operator is stored by its coefficients a_0..a_n in the trivializing
frames dz^a, dz^b, so that D s = sum_k a_k s^(k).  Coefficients may be
rational functions or truncated series (the latter arise from pullback by a
formal coordinate change and from extraction at a base point).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

from .errors import ArityMismatch, SingularChange, WeightMismatch
from .exact.halfint import HalfInteger, oper_weights
from .exact.matrix import Matrix
from .exact.ratfunc import RationalFunction, as_rf
from .exact.series import TruncatedSeries


def _zero_of(x):
    return x * 0


def _nth_derivative(f, k: int):
    for _ in range(k):
        f = f.derivative()
    return f


class WeightedDiffOp:
    __slots__ = ("coeffs", "source_weight", "target_weight")

    def __init__(self, coeffs: Sequence, source_weight=None, target_weight=None):
        coeffs = tuple(c if isinstance(c, (RationalFunction, TruncatedSeries)) else as_rf(c) for c in coeffs)
        if not coeffs:
            raise ArityMismatch("an operator needs at least one coefficient")
        n = len(coeffs) - 1
        a, b = oper_weights(n)
        self.coeffs = coeffs
        self.source_weight = a if source_weight is None else HalfInteger.of(source_weight)
        self.target_weight = b if target_weight is None else HalfInteger.of(target_weight)

    @classmethod
    def oper(cls, coeffs: Sequence) -> "WeightedDiffOp":
        """Operator on the oper space K^{(1-n)/2} -> K^{(n+1)/2}."""
        return cls(coeffs)

    @classmethod
    def multiplication(cls, f, weight=0) -> "WeightedDiffOp":
        return cls([f], weight, weight)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def is_oper_space(self) -> bool:
        a, b = oper_weights(self.order)
        return self.source_weight == a and self.target_weight == b

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedDiffOp):
            return NotImplemented
        return (
            self.coeffs == other.coeffs
            and self.source_weight == other.source_weight
            and self.target_weight == other.target_weight
        )

    def __hash__(self) -> int:
        return hash((self.coeffs, self.source_weight, self.target_weight))

    def _same_space(self, other: "WeightedDiffOp") -> None:
        if (self.source_weight, self.target_weight) != (other.source_weight, other.target_weight):
            raise WeightMismatch("operators act between different density lines")

    def __add__(self, other: "WeightedDiffOp") -> "WeightedDiffOp":
        self._same_space(other)
        return WeightedDiffOp(_add_coeffs(self.coeffs, other.coeffs), self.source_weight, self.target_weight)

    def __sub__(self, other: "WeightedDiffOp") -> "WeightedDiffOp":
        return self + other.scale(-1)

    def scale(self, c) -> "WeightedDiffOp":
        return WeightedDiffOp([a * c for a in self.coeffs], self.source_weight, self.target_weight)

    def padded(self, n: int) -> "WeightedDiffOp":
        """Same operator with zero coefficients added up to order n."""
        z = _zero_of(self.coeffs[0])
        return WeightedDiffOp(self.coeffs + (z,) * (n - self.order), self.source_weight, self.target_weight)

    def trimmed(self) -> "WeightedDiffOp":
        c = list(self.coeffs)
        while len(c) > 1 and not c[-1]:
            c.pop()
        return WeightedDiffOp(c, self.source_weight, self.target_weight)

    def __repr__(self) -> str:
        return f"WeightedDiffOp({format_op(self)!r}, a={self.source_weight}, b={self.target_weight})"

    def __str__(self) -> str:
        return format_op(self)


def format_op(D: WeightedDiffOp) -> str:
    parts = []
    for k in range(D.order, -1, -1):
        c = D.coeffs[k]
        if not c:
            continue
        d = "" if k == 0 else ("d" if k == 1 else f"d^{k}")
        if not d:
            parts.append(f"({c})")
        elif c == 1:
            parts.append(d)
        else:
            parts.append(f"({c})*{d}")
    return " + ".join(parts) if parts else "0"


def _add_coeffs(a: Sequence, b: Sequence) -> list:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return out


# application and composition ----------------------------------------------------

def apply(D: WeightedDiffOp, s):
    """Sum_k a_k s^(k); a series input loses D.order orders of precision."""
    from .errors import InsufficientOrder

    if isinstance(s, TruncatedSeries) and s.order < D.order:
        raise InsufficientOrder(f"series of order {s.order} cannot feed an operator of order {D.order}")
    if not isinstance(s, (TruncatedSeries, RationalFunction)):
        s = as_rf(s)
    derivs = [s]
    for _ in range(D.order):
        derivs.append(derivs[-1].derivative())
    if isinstance(s, TruncatedSeries):
        keep = s.order - D.order
        derivs = [d.truncate(keep) for d in derivs]
    acc = _zero_of(derivs[0])
    for a, d in zip(D.coeffs, derivs):
        if a:
            acc = acc + d * a
    return acc


def _compose_coeffs(p: Sequence, q: Sequence) -> list:
    """Coefficients of P o Q, where P = sum p_i d^i and Q = sum q_k d^k."""
    zero = _zero_of(p[0]) + _zero_of(q[0])
    out = [zero] * (len(p) + len(q) - 1)
    # derivatives of each q_k up to the order of P
    qd = [[qk] for qk in q]
    for i in range(1, len(p)):
        for lst in qd:
            lst.append(lst[-1].derivative())
    for i, pi in enumerate(p):
        if not pi:
            continue
        for k in range(len(q)):
            for l in range(i + 1):
                ql = qd[k][l]
                if ql:
                    out[k + i - l] = out[k + i - l] + pi * ql * comb(i, l)
    return out


def compose(D1: WeightedDiffOp, D2: WeightedDiffOp) -> WeightedDiffOp:
    """D1 o D2 (apply D2 first)."""
    if D2.target_weight != D1.source_weight:
        raise WeightMismatch(f"cannot compose: target weight {D2.target_weight} != source weight {D1.source_weight}")
    return WeightedDiffOp(_compose_coeffs(D1.coeffs, D2.coeffs), D2.source_weight, D1.target_weight)


def symbol(D: WeightedDiffOp):
    return D.coeffs[-1]


# adjoints ---------------------------------------------------------------------

def formal_transpose(D: WeightedDiffOp) -> WeightedDiffOp:
    """t |-> sum_k (-1)^k (a_k t)^(k), acting K^{1-b} -> K^{1-a}."""
    n = D.order
    derivs = [[a] for a in D.coeffs]
    for k, lst in enumerate(derivs):
        for _ in range(k):
            lst.append(lst[-1].derivative())
    out = []
    for i in range(n + 1):
        acc = _zero_of(D.coeffs[0])
        for k in range(i, n + 1):
            term = derivs[k][k - i]
            if term:
                acc = acc + term * ((-1) ** k * comb(k, i))
        out.append(acc)
    one = HalfInteger(2)
    return WeightedDiffOp(out, one - D.target_weight, one - D.source_weight)


def adjoint(D: WeightedDiffOp) -> WeightedDiffOp:
    """Symbol-preserving Lagrange adjoint (-1)^n D^T on the oper space."""
    if not D.is_oper_space():
        raise WeightMismatch(
            f"adjoint needs weights ((1-n)/2, (n+1)/2) for n = {D.order}, "
            f"got ({D.source_weight}, {D.target_weight})"
        )
    return formal_transpose(D).scale((-1) ** D.order)


# coordinate changes -----------------------------------------------------------------

def schwarzian(phi):
    """S(phi) = phi'''/phi' - (3/2) (phi''/phi')^2."""
    d1 = phi.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    r = d2 / d1
    return d3 / d1 - r * r * Fraction(3, 2)


def pullback(D: WeightedDiffOp, phi) -> WeightedDiffOp:
    """Operator in the coordinate zeta where z = phi(zeta).

    Sections transform as s~ = (phi')^a (s o phi) and outputs as
    (phi')^b (Ds o phi); the result is phi'^(b-a) sum_k a_k(phi) U^k with
    U = (1/phi') (d - a phi''/phi').
    """
    if not isinstance(phi, (TruncatedSeries, RationalFunction)):
        phi = as_rf(phi)
    d1 = phi.derivative()
    if isinstance(d1, TruncatedSeries):
        if not d1.coeffs[0]:
            raise SingularChange(f"phi' vanishes at the base point {d1.base_point}")
    elif not d1:
        raise SingularChange("phi' is identically zero")
    psi = d1.derivative() / d1
    a = D.source_weight.value
    inv = 1 / d1
    u = [-(psi * inv) * a, inv]
    n_space = (D.target_weight - D.source_weight).value
    if n_space.denominator != 1:
        raise WeightMismatch("pullback needs an integral weight difference")
    scale = d1 ** int(n_space)
    power = [_zero_of(inv) + 1]
    acc = [_zero_of(inv)] * (D.order + 1)
    for k, ak in enumerate(D.coeffs):
        if k:
            power = _compose_coeffs(u, power)
        if not ak:
            continue
        ak_phi = ak(phi) if isinstance(ak, RationalFunction) else _compose_series(ak, phi)
        for i, c in enumerate(power):
            if c:
                acc[i] = acc[i] + c * ak_phi
    return WeightedDiffOp([c * scale for c in acc], D.source_weight, D.target_weight)


def _compose_series(a: TruncatedSeries, phi):
    if a.is_zero():
        return _zero_of(phi)
    raise SingularChange("pullback of series coefficients is not supported")


# decomposition into tensor components --------------------------------------------

@dataclass(frozen=True)
class TensorComponents:
    n: int
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.n + 1:
            raise ArityMismatch(f"order {self.n} needs {self.n + 1} components, got {len(self.components)}")

    def __getitem__(self, j: int):
        return self.components[j]


class OperClass(str, enum.Enum):
    NOT_OPER = "NotOper"
    GL = "GL"
    SL = "SL"
    SP = "Sp"
    SO = "SO"

    def __str__(self) -> str:
        return self.value


def lift_coefficients(n: int, j: int) -> list[Fraction]:
    """Weights c_r in L_j(w) = sum_r c_r w^(r) d^(n-j-r), for 1 <= j <= n.

    These are the Rankin-Cohen type coefficients that make L_j equivariant
    under Moebius changes of coordinate.
    """
    top = comb(n + j - 1, n - j)
    return [Fraction(comb(n + j - 1, n - j - r) * comb(j + r - 1, r), top) for r in range(n - j + 1)]


def lift(n: int, j: int, w) -> WeightedDiffOp:
    """L_j(w) as an operator of declared order n on the oper space."""
    if not 0 <= j <= n:
        raise ArityMismatch(f"component index {j} outside 0..{n}")
    if not isinstance(w, (RationalFunction, TruncatedSeries)):
        w = as_rf(w)
    zero = _zero_of(w)
    if j == 0:
        m0 = WeightedDiffOp([zero] * n + [w])
        return (m0 + adjoint(m0)).scale(Fraction(1, 2))
    coeffs = [zero] * (n + 1)
    wd = w
    for r, c in enumerate(lift_coefficients(n, j)):
        if r:
            wd = wd.derivative()
        coeffs[n - j - r] = wd * c
    return WeightedDiffOp(coeffs)


def decompose(D: WeightedDiffOp) -> TensorComponents:
    if not D.is_oper_space():
        raise WeightMismatch("decompose needs oper-space weights")
    n = D.order
    rem = D
    comps = []
    for j in range(n + 1):
        w = rem.coeffs[n - j]
        comps.append(w)
        if w:
            rem = rem - lift(n, j, w)
    return TensorComponents(n, tuple(comps))


def recompose(tc: TensorComponents, n: int | None = None) -> WeightedDiffOp:
    n = tc.n if n is None else n
    if len(tc.components) != n + 1:
        raise ArityMismatch(f"order {n} needs {n + 1} components, got {len(tc.components)}")
    zero = _zero_of(tc.components[0]) if isinstance(tc.components[0], (RationalFunction, TruncatedSeries)) else as_rf(0)
    acc = WeightedDiffOp([zero] * (n + 1))
    for j, w in enumerate(tc.components):
        if not isinstance(w, (RationalFunction, TruncatedSeries)):
            w = as_rf(w)
        if w:
            acc = acc + lift(n, j, w)
    return acc


def classify(D: WeightedDiffOp) -> OperClass:
    tc = decompose(D)
    n = D.order
    w = tc.components
    if not (w[0] == 1 or (isinstance(w[0], TruncatedSeries) and (w[0] - 1).is_zero())):
        return OperClass.NOT_OPER
    if n >= 1 and w[1]:
        return OperClass.GL
    if all(not w[2 * j + 1] for j in range(1, (n - 1) // 2 + 1)):
        return OperClass.SP if n % 2 == 0 else OperClass.SO
    return OperClass.SL


# symmetric powers ----------------------------------------------------------------

def sym_power_gram(d: int) -> Matrix:
    """Gram matrix on monomials e1^(d-k) e2^k, k = 0..d."""
    if d < 0:
        raise ArityMismatch("symmetric power degree must be nonnegative")
    rows = []
    for a in range(d + 1):
        row = []
        for b in range(d + 1):
            if a + b == d:
                row.append(Fraction((-1) ** a * factorial(a) * factorial(d - a), factorial(d)))
            else:
                row.append(Fraction(0))
        rows.append(row)
    return Matrix(rows)


def sym_power_pairing(d: int, v: Sequence, w: Sequence) -> Fraction:
    """Symmetrized product of the standard symplectic pairing on Sym^d(C^2)."""
    if len(v) != d + 1 or len(w) != d + 1:
        raise ArityMismatch(f"Sym^{d} vectors need {d + 1} monomial coefficients")
    acc = Fraction(0)
    for a in range(d + 1):
        if v[a] and w[d - a]:
            acc += Fraction(v[a]) * Fraction(w[d - a]) * (-1) ** a * factorial(a) * factorial(d - a) / factorial(d)
    return acc

