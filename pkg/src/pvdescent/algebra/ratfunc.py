"""Rational functions in z over Q(i), kept in reduced form with a monic denominator."""

from __future__ import annotations

from .gaussian import ONE, GaussianRational, as_gr
from .poly import Poly, poly_gcd

__all__ = ["RationalFunction"]


class RationalFunction:
    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Poly) else Poly.const(num)
        den = Poly.const(1) if den is None else (den if isinstance(den, Poly) else Poly.const(den))
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num:
            self.num, self.den = num, Poly.const(1)
            return
        if not den.is_const():
            g = poly_gcd(num, den)
            if not g.is_const():
                num, den = num.exact_div(g), den.exact_div(g)
        lc = den.lc()
        if lc != ONE:
            inv = lc.inverse()
            num, den = num * inv, den * inv
        self.num, self.den = num, den

    @classmethod
    def _raw(cls, num: Poly, den: Poly) -> "RationalFunction":
        f = object.__new__(cls)
        f.num, f.den = num, den
        return f

    @classmethod
    def const(cls, c) -> "RationalFunction":
        return cls._raw(Poly.const(c), Poly.const(1))

    @classmethod
    def z(cls) -> "RationalFunction":
        return cls._raw(Poly.z(), Poly.const(1))

    # --- predicates ---------------------------------------------------------------
    def __bool__(self):
        return bool(self.num)

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def is_polynomial(self) -> bool:
        return self.den.is_const()

    def is_real(self) -> bool:
        return self.num.is_real() and self.den.is_real()

    def constant_value(self) -> GaussianRational:
        if not self.is_const():
            raise ValueError("not a constant")
        return self.num.coeff(0)

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, GaussianRational)):
            return self == RationalFunction.const(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        from .printer import format_ratfunc

        return f"RationalFunction({format_ratfunc(self)!r})"

    def __str__(self):
        from .printer import format_ratfunc

        return format_ratfunc(self)

    # --- field operations -----------------------------------------------------------
    @staticmethod
    def _lift(x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, Poly):
            return RationalFunction._raw(x, Poly.const(1))
        return RationalFunction.const(as_gr(x))

    def __add__(self, other):
        other = self._lift(other)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if not self or not other:
            return RationalFunction.const(0)
        if self.is_polynomial() and other.is_polynomial():
            return RationalFunction._raw(self.num * other.num, Poly.const(1))
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if not self:
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunction._raw(self.num ** k, self.den ** k)

    # --- derivation, conjugation, evaluation -------------------------------------------
    def derivative(self) -> "RationalFunction":
        """Formal d/dz by the quotient rule."""
        if self.is_polynomial():
            return RationalFunction._raw(self.num.derivative(), self.den)
        num = self.num.derivative() * self.den - self.num * self.den.derivative()
        return RationalFunction(num, self.den * self.den)

    def conjugate(self) -> "RationalFunction":
        # conjugating coefficients preserves reducedness and monicity
        return RationalFunction._raw(self.num.conjugate(), self.den.conjugate())

    def real_imag(self):
        """Split f = a + i*b with a, b having real coefficients."""
        d = self.den * self.den.conjugate()
        n = self.num * self.den.conjugate()
        return RationalFunction(n.real_part(), d), RationalFunction(n.imag_part(), d)

    def __call__(self, x):
        x = as_gr(x)
        d = self.den(x)
        if not d:
            from ..errors import PoleEvaluation

            raise PoleEvaluation(f"pole of {self} at {x}")
        return self.num(x) / d
