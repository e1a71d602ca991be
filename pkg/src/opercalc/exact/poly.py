"""Dense univariate polynomials over Q in the chart variable z."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from ..errors import DivisionByZero

Scalar = Fraction | int


def _trim(coeffs: list[Fraction]) -> tuple[Fraction, ...]:
    end = len(coeffs)
    while end and not coeffs[end - 1]:
        end -= 1
    return tuple(coeffs[:end])


class Poly:
    """Immutable polynomial, coefficients stored low degree first.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        self.coeffs = _trim([Fraction(c) for c in coeffs])

    @classmethod
    def _raw(cls, coeffs: tuple[Fraction, ...]) -> "Poly":
        p = cls.__new__(cls)
        p.coeffs = coeffs
        return p

    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls((c,))

    @classmethod
    def z(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1) -> "Poly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    def is_one(self) -> bool:
        return self.coeffs == (Fraction(1),)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        return format_poly(self)

    def __neg__(self) -> "Poly":
        return Poly._raw(tuple(-c for c in self.coeffs))

    def __add__(self, other: "Poly | Scalar") -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly._raw(_trim(out))

    __radd__ = __add__

    def __sub__(self, other: "Poly | Scalar") -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "Poly":
        return Poly.const(other) - self

    def __mul__(self, other: "Poly | Scalar") -> "Poly":
        if not isinstance(other, Poly):
            c = Fraction(other)
            if not c:
                return Poly._raw(())
            return Poly._raw(tuple(x * c for x in self.coeffs))
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly._raw(())
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return Poly._raw(_trim(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        rem = list(self.coeffs)
        db = other.degree
        inv_lead = 1 / other.lead
        if len(rem) - 1 < db:
            return Poly._raw(()), self
        quot = [Fraction(0)] * (len(rem) - db)
        bc = other.coeffs
        for k in range(len(rem) - 1 - db, -1, -1):
            c = rem[k + db] * inv_lead
            quot[k] = c
            if c:
                for j in range(db + 1):
                    rem[k + j] -= c * bc[j]
        return Poly._raw(_trim(quot)), Poly._raw(_trim(rem[:db]))

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero() or self.lead == 1:
            return self
        inv = 1 / self.lead
        return Poly._raw(tuple(c * inv for c in self.coeffs))

    def derivative(self) -> "Poly":
        return Poly._raw(tuple(k * c for k, c in enumerate(self.coeffs) if k)) if self.coeffs else self

    def __call__(self, x):
        """Horner evaluation; ``x`` may be a scalar or any ring element."""
        result = 0
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def taylor(self, z0: Scalar) -> list[Fraction]:
        """Coefficients of p(z0 + t) in powers of t (synthetic division)."""
        z0 = Fraction(z0)
        c = list(self.coeffs)
        n = len(c)
        for i in range(n):
            for k in range(n - 2, i - 1, -1):
                c[k] += z0 * c[k + 1]
        return c


def _primitive(coeffs: Sequence[Fraction]) -> list[int]:
    """Integer multiple of ``coeffs`` with content 1."""
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return [c // g for c in ints] if g > 1 else ints


def _int_prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of integer polynomials (low degree first)."""
    rem = a[:]
    db = len(b) - 1
    lb = b[-1]
    while len(rem) - 1 >= db and rem:
        lr = rem[-1]
        shift = len(rem) - 1 - db
        rem = [lb * c for c in rem]
        for j in range(db + 1):
            rem[shift + j] -= lr * b[j]
        while rem and not rem[-1]:
            rem.pop()
    return rem


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero if both are zero), via a primitive remainder sequence."""
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    x, y = _primitive(a.coeffs), _primitive(b.coeffs)
    if len(x) < len(y):
        x, y = y, x
    while len(y) > 1:
        r = _int_prem(x, y)
        if not r:
            break
        x, y = y, _primitive([Fraction(c) for c in r])
    else:
        return Poly._raw((Fraction(1),))
    return Poly(y).monic()


def poly_from_sequence(coeffs: Sequence[Scalar]) -> Poly:
    return Poly(coeffs)


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly, var: str = "z") -> str:
    if p.is_zero():
        return "0"
    parts: list[str] = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        mag = -c if c < 0 else c
        if k == 0:
            body = _format_coeff(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{_format_coeff(mag)}*{mono}"
        if not parts:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)
