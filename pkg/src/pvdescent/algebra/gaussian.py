"""Exact Gaussian rationals a + b*i with a, b in Q.

Both parts are stored as ``gmpy2.mpq``; those are always reduced with a positive
denominator, so the canonical form comes for free.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

__all__ = ["GaussianRational", "GR", "as_gr", "ZERO", "ONE", "I"]


def _q(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, bool):
        return mpq(int(x))
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, Rational):
        return mpq(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        f = Fraction(x)
        return mpq(f.numerator, f.denominator)
    if isinstance(x, float):
        # exact binary value of the float
        n, d = x.as_integer_ratio()
        return mpq(n, d)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def from_complex(cls, z: complex, digits: int = 15) -> "GaussianRational":
        """Round a floating complex number to ``digits`` significant decimal digits, exactly."""
        z = complex(z)
        return cls(_q(f"{z.real:.{digits}g}"), _q(f"{z.imag:.{digits}g}"))

    # --- predicates -------------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction, type(mpq(0)))):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    # --- arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _gr(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _gr(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return _gr(a * c, b)
        return _gr(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __neg__(self):
        return _gr(-self.re, -self.im)

    def __pos__(self):
        return self

    def norm(self) -> mpq:
        """Squared modulus a^2 + b^2 (exact)."""
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if not n:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return _gr(self.re / n, -self.im / n)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other.im:
            if not other.re:
                raise ZeroDivisionError("division by zero Gaussian rational")
            return _gr(self.re / other.re, self.im / other.re)
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return _gr(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_gr(self)


def _gr(re: mpq, im: mpq) -> GaussianRational:
    # trusted constructor: skips coercion
    g = object.__new__(GaussianRational)
    g.re = re
    g.im = im
    return g


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    try:
        return _gr(_q(x), mpq(0))
    except TypeError:
        return None


def as_gr(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, complex):
        return GaussianRational(x.real, x.imag)
    return GaussianRational(x, 0)


def _fmt_q(q: mpq) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_gr(g: GaussianRational) -> str:
    """Canonical text form, readable back by the system parser."""
    re, im = g.re, g.im
    if not im:
        return _fmt_q(re)
    if im == 1:
        ims = "i"
    elif im == -1:
        ims = "-i"
    else:
        ims = f"{_fmt_q(im)}*i"
    if not re:
        return ims
    sep = "" if ims.startswith("-") else "+"
    return f"({_fmt_q(re)}{sep}{ims})"


GR = GaussianRational
ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)
I = GaussianRational(0, 1)
