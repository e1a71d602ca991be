"""Reduced rational functions in Q(z) and their text form.

A RationalFunction is always stored with gcd(num, den) = 1 and a monic
denominator, so equality is structural.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

from ..errors import DivisionByZero, ParseError, PoleAtBasePoint
from .poly import Poly, format_poly, poly_gcd

Scalar = Union[Fraction, int]

_ONE = Poly.const(1)


class RationalFunction:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly | Scalar = 0, den: Poly | Scalar = 1):
        if not isinstance(num, Poly):
            num = Poly.const(num)
        if not isinstance(den, Poly):
            den = Poly.const(den)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if num.is_zero():
            num, den = num, _ONE
        elif not den.is_const():
            g = poly_gcd(num, den)
            if not g.is_one():
                num, den = num // g, den // g
        lead = den.lead
        if lead != 1:
            num, den = num * (1 / lead), den * (1 / lead)
        self.num = num
        self.den = den

    @classmethod
    def _raw(cls, num: Poly, den: Poly) -> "RationalFunction":
        r = cls.__new__(cls)
        r.num = num
        r.den = den
        return r

    @classmethod
    def const(cls, c: Scalar) -> "RationalFunction":
        return cls._raw(Poly.const(c), _ONE)

    @classmethod
    def z(cls) -> "RationalFunction":
        return cls._raw(Poly.z(), _ONE)

    @classmethod
    def poly(cls, p: Poly) -> "RationalFunction":
        return cls._raw(p, _ONE)

    @classmethod
    def parse(cls, text: str) -> "RationalFunction":
        return parse_rf(text)

    # predicates -----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_one()

    def is_const(self) -> bool:
        return self.den.is_one() and self.num.is_const()

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError(f"{self} is not constant")
        return self.num.coeffs[0] if self.num.coeffs else Fraction(0)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RationalFunction):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.den.is_one() and self.num == other
        if isinstance(other, Poly):
            return self.den.is_one() and self.num == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Poly):
            return RationalFunction._raw(other, _ONE)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.const(other)
        raise TypeError(f"cannot coerce {type(other).__name__} to RationalFunction")

    def __neg__(self) -> "RationalFunction":
        return RationalFunction._raw(-self.num, self.den)

    def __add__(self, other) -> "RationalFunction":
        if not isinstance(other, (RationalFunction, Poly, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        if self.den == o.den:
            if self.den.is_one():
                return RationalFunction._raw(self.num + o.num, _ONE)
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        if not isinstance(other, (RationalFunction, Poly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        if isinstance(other, (int, Fraction)):
            if not other:
                return RationalFunction._raw(Poly(), _ONE)
            return RationalFunction._raw(self.num * other, self.den)
        if not isinstance(other, (RationalFunction, Poly)):
            return NotImplemented
        o = self._coerce(other)
        if self.den.is_one() and o.den.is_one():
            return RationalFunction._raw(self.num * o.num, _ONE)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        if not isinstance(other, (RationalFunction, Poly, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        if o.is_zero():
            raise DivisionByZero(f"division of {self} by the zero function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._coerce(other) / self

    def __pow__(self, k: int) -> "RationalFunction":
        if k < 0:
            return RationalFunction.const(1) / (self ** (-k))
        return RationalFunction._raw(self.num ** k, self.den ** k)

    def inverse(self) -> "RationalFunction":
        return RationalFunction.const(1) / self

    def derivative(self) -> "RationalFunction":
        if self.den.is_one():
            return RationalFunction._raw(self.num.derivative(), _ONE)
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    # evaluation -----------------------------------------------------------
    def is_regular_at(self, x: Scalar) -> bool:
        return bool(self.den(Fraction(x)))

    def __call__(self, x):
        """Evaluate at a scalar or compose with a ring element (series, RF)."""
        if isinstance(x, (int, Fraction)):
            d = self.den(Fraction(x))
            if not d:
                raise PoleAtBasePoint(f"{self} has a pole at z = {x}")
            return self.num(Fraction(x)) / d
        return self.num(x) / self.den(x)

    def degree_size(self) -> int:
        return max(self.num.degree, 0) + self.den.degree

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r})"

    def __str__(self) -> str:
        return format_rf(self)


RF = RationalFunction


def format_rf(f: RationalFunction, var: str = "z") -> str:
    if f.den.is_one():
        return format_poly(f.num, var)
    return f"({format_poly(f.num, var)}) / ({format_poly(f.den, var)})"


# parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[str]:
    pos = 0
    out: list[str] = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r} at column {pos + 1} in {text!r}")
        tok = m.group(1) or m.group(2) or m.group(3)
        out.append("^" if tok == "**" else tok)
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, var: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.var = var

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of expression in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> RationalFunction:
        if not self.tokens:
            raise ParseError("empty expression")
        value = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing token {self.peek()!r} in {self.text!r}")
        return value

    def expr(self) -> RationalFunction:
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RationalFunction:
        value = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                try:
                    value = value / rhs
                except DivisionByZero as exc:
                    raise ParseError(f"division by zero in {self.text!r}") from exc
        return value

    def unary(self) -> RationalFunction:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> RationalFunction:
        base = self.atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok = self.take()
            if not tok.isdigit():
                raise ParseError(f"exponent must be an integer literal in {self.text!r}")
            exp = sign * int(tok)
            if exp < 0 and base.is_zero():
                raise ParseError(f"negative power of zero in {self.text!r}")
            return base ** exp
        return base

    def atom(self) -> RationalFunction:
        tok = self.take()
        if tok.isdigit():
            return RationalFunction.const(int(tok))
        if tok == "(":
            value = self.expr()
            if self.take() != ")":
                raise ParseError(f"missing ')' in {self.text!r}")
            return value
        if tok == self.var:
            return RationalFunction.z()
        raise ParseError(f"unknown symbol {tok!r} in {self.text!r}")


def parse_rf(text: str, var: str = "z") -> RationalFunction:
    """Parse strings such as ``"(3*z^2 + 1/2) / (z + 1)"``."""
    if isinstance(text, (int, Fraction)):
        return RationalFunction.const(text)
    if not isinstance(text, str):
        raise ParseError(f"expected an expression string, got {type(text).__name__}")
    return _Parser(text, var).parse()


def as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, str):
        return parse_rf(x)
    return RationalFunction._coerce(x)
