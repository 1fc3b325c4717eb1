"""Exact Gaussian-rational scalars.

A scalar is re + im*i with arbitrary-precision rational components (gmpy2.mpq,
always stored in lowest terms with positive denominator).  This is the
coefficient field of the whole kernel; every other algebraic constant enters
as a generator with a quadratic relation.
"""

from __future__ import annotations

from gmpy2 import mpq

_MPQ0 = mpq(0)
_MPQ1 = mpq(1)


class QI:
    """A Gaussian rational: value = re + im*i, exact field arithmetic."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is type(_MPQ0) else mpq(re)
        self.im = im if type(im) is type(_MPQ0) else mpq(im)

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_rational(num: int, den: int = 1) -> "QI":
        return QI(mpq(num, den))

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_one(self) -> bool:
        return self.re == _MPQ1 and not self.im

    def is_real(self) -> bool:
        return not self.im

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "QI") -> "QI":
        return QI(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "QI") -> "QI":
        return QI(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "QI":
        return QI(-self.re, -self.im)

    def __mul__(self, other: "QI") -> "QI":
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return QI(a * c)
        return QI(a * c - b * d, a * d + b * c)

    def inv(self) -> "QI":
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("inverse of zero scalar")
            return QI(1 / a)
        n = a * a + b * b
        return QI(a / n, -b / n)

    def __truediv__(self, other: "QI") -> "QI":
        return self * other.inv()

    def __pow__(self, k: int) -> "QI":
        if k < 0:
            return self.inv() ** (-k)
        r = ONE
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    # -- comparison / hashing -------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, QI) and self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    # -- conversion ------------------------------------------------------

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"


ZERO = QI(0)
ONE = QI(1)
I = QI(0, 1)
MINUS_ONE = QI(-1)


def qi(re, im=0) -> QI:
    """Convenience constructor accepting ints, fractions or mpq."""
    return QI(re, im)
