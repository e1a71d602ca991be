from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, order=True)
class HalfInteger:
    """Density weight w = twice_value / 2, the exponent in K^w."""

    twice_value: int

    @classmethod
    def of(cls, value) -> "HalfInteger":
        if isinstance(value, HalfInteger):
            return value
        f = Fraction(value) * 2
        if f.denominator != 1:
            raise ValueError(f"{value} is not a half-integer")
        return cls(int(f))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    def __add__(self, other: "HalfInteger") -> "HalfInteger":
        return HalfInteger(self.twice_value + HalfInteger.of(other).twice_value)

    def __sub__(self, other: "HalfInteger") -> "HalfInteger":
        return HalfInteger(self.twice_value - HalfInteger.of(other).twice_value)

    def __str__(self) -> str:
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def oper_weights(n: int) -> tuple[HalfInteger, HalfInteger]:
    """Source and target weights (1-n)/2 and (n+1)/2 of an order-n oper."""
    return HalfInteger(1 - n), HalfInteger(n + 1)
