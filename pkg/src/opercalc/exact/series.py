"""Truncated Taylor series at a rational base point.

A series of order N carries the coefficients of (z - z0)^0 .. (z - z0)^N.
Every operation tracks precision: a product is only known through the
smaller of the two orders, and differentiation loses one order.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Iterable

from ..errors import DivisionByZero, InsufficientOrder, PoleAtBasePoint


class TruncatedSeries:
    __slots__ = ("base_point", "coeffs")

    def __init__(self, base_point, coeffs: Iterable):
        self.base_point = Fraction(base_point)
        self.coeffs = tuple(Fraction(c) for c in coeffs)
        if not self.coeffs:
            raise InsufficientOrder("a series needs at least one coefficient")

    @classmethod
    def _raw(cls, base_point: Fraction, coeffs: tuple[Fraction, ...]) -> "TruncatedSeries":
        s = cls.__new__(cls)
        s.base_point = base_point
        s.coeffs = coeffs
        return s

    @classmethod
    def const(cls, c, base_point, order: int) -> "TruncatedSeries":
        return cls._raw(Fraction(base_point), (Fraction(c),) + (Fraction(0),) * order)

    @classmethod
    def variable(cls, base_point, order: int) -> "TruncatedSeries":
        """The coordinate function z itself, expanded at base_point."""
        z0 = Fraction(base_point)
        coeffs = [z0, Fraction(1)] + [Fraction(0)] * (order - 1)
        return cls._raw(z0, tuple(coeffs[: order + 1]))

    @classmethod
    def from_rf(cls, f, base_point, order: int) -> "TruncatedSeries":
        """Taylor expansion of a rational function (raises at a pole)."""
        z0 = Fraction(base_point)
        num = f.num.taylor(z0)
        den = f.den.taylor(z0)
        if not den[0]:
            raise PoleAtBasePoint(f"{f} has a pole at z = {z0}")
        num = (num + [Fraction(0)] * (order + 1))[: order + 1]
        den = (den + [Fraction(0)] * (order + 1))[: order + 1]
        return cls._raw(z0, _div_coeffs(num, den, order))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise InsufficientOrder(f"cannot raise series order {self.order} to {order}")
        return TruncatedSeries._raw(self.base_point, self.coeffs[: order + 1])

    def value(self) -> Fraction:
        return self.coeffs[0]

    def derivative_at(self, k: int) -> Fraction:
        """k-th derivative at the base point."""
        if k > self.order:
            raise InsufficientOrder(f"series of order {self.order} has no derivative {k}")
        return self.coeffs[k] * factorial(k)

    def jet(self, k: int) -> list[Fraction]:
        return [self.derivative_at(j) for j in range(k + 1)]

    def _check(self, other: "TruncatedSeries") -> None:
        if other.base_point != self.base_point:
            raise ValueError(f"series at different base points {self.base_point} and {other.base_point}")

    def _coerce(self, other) -> "TruncatedSeries | None":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.const(other, self.base_point, self.order)
        # RationalFunction or Poly: expand at our base point
        from .ratfunc import RationalFunction
        from .poly import Poly

        if isinstance(other, Poly):
            other = RationalFunction.poly(other)
        if isinstance(other, RationalFunction):
            return TruncatedSeries.from_rf(other, self.base_point, self.order)
        return None

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TruncatedSeries):
            return self.base_point == other.base_point and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.base_point, self.coeffs))

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._raw(self.base_point, tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction)):
            if not other:
                return self
            return TruncatedSeries._raw(self.base_point, (self.coeffs[0] + other,) + self.coeffs[1:])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = min(len(self.coeffs), len(o.coeffs))
        return TruncatedSeries._raw(self.base_point, tuple(a + b for a, b in zip(self.coeffs[:n], o.coeffs[:n])))

    __radd__ = __add__

    def __sub__(self, other) -> "TruncatedSeries":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "TruncatedSeries":
        return (-self) + other

    def __mul__(self, other) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries._raw(self.base_point, tuple(c * other for c in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = min(len(self.coeffs), len(o.coeffs))
        a, b = self.coeffs, o.coeffs
        out = [Fraction(0)] * n
        for i in range(n):
            x = a[i]
            if not x:
                continue
            for j in range(n - i):
                y = b[j]
                if y:
                    out[i + j] += x * y
        return TruncatedSeries._raw(self.base_point, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        if not self.coeffs[0]:
            raise DivisionByZero("series with zero constant term is not invertible")
        one = [Fraction(1)] + [Fraction(0)] * self.order
        return TruncatedSeries._raw(self.base_point, _div_coeffs(one, list(self.coeffs), self.order))

    def __truediv__(self, other) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise DivisionByZero("series divided by zero")
            inv = 1 / Fraction(other)
            return TruncatedSeries._raw(self.base_point, tuple(c * inv for c in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o.coeffs[0]:
            raise DivisionByZero("series with zero constant term is not invertible")
        n = min(self.order, o.order)
        return TruncatedSeries._raw(self.base_point, _div_coeffs(list(self.coeffs[: n + 1]), list(o.coeffs[: n + 1]), n))

    def __rtruediv__(self, other) -> "TruncatedSeries":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return (self ** (-k)).inverse()
        result = TruncatedSeries.const(1, self.base_point, self.order)
        for _ in range(k):
            result = result * self
        return result

    def derivative(self) -> "TruncatedSeries":
        if self.order == 0:
            raise InsufficientOrder("derivative of an order-0 series is unknown")
        return TruncatedSeries._raw(self.base_point, tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def compose_into(self, f):
        """f(self) for a rational function f, as a series in self's variable."""
        return f(self)

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.base_point}, {[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        return format_series(self)


def _div_coeffs(num: list[Fraction], den: list[Fraction], order: int) -> tuple[Fraction, ...]:
    inv0 = 1 / den[0]
    out: list[Fraction] = []
    for k in range(order + 1):
        acc = num[k] if k < len(num) else Fraction(0)
        for j in range(1, min(k, len(den) - 1) + 1):
            if den[j]:
                acc -= den[j] * out[k - j]
        out.append(acc * inv0)
    return tuple(out)


def format_series(s: TruncatedSeries) -> str:
    from .poly import _format_coeff

    t = "z" if s.base_point == 0 else f"(z - {_format_coeff(s.base_point)})"
    parts: list[str] = []
    for k, c in enumerate(s.coeffs):
        if not c:
            continue
        mag = -c if c < 0 else c
        if k == 0:
            body = _format_coeff(mag)
        else:
            mono = t if k == 1 else f"{t}^{k}"
            body = mono if mag == 1 else f"{_format_coeff(mag)}*{mono}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f" {'-' if c < 0 else '+'} {body}")
    body = "".join(parts) if parts else "0"
    return f"{body} + O({t}^{s.order + 1})"
