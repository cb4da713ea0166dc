"""Floating complex values with an optional error radius.

``err is None`` means plain floating mode (no tracking). With tracking on, every
operation returns a radius that encloses the propagated input radii plus a
rounding allowance, so radii only grow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import PoleEvaluation
from .gaussian import GaussianRational

__all__ = ["ComplexApprox", "eval_at"]

_U = 2.0 ** -52  # unit roundoff allowance per operation (generous)


@dataclass(frozen=True)
class ComplexApprox:
    re: float
    im: float = 0.0
    err: float | None = None

    def __post_init__(self):
        if self.err is not None and not self.err >= 0.0:
            raise ValueError("error radius must be non-negative")

    @classmethod
    def of(cls, x, track: bool = False) -> "ComplexApprox":
        if isinstance(x, ComplexApprox):
            if track and x.err is None:
                return cls(x.re, x.im, 0.0)
            return x
        if isinstance(x, GaussianRational):
            z = complex(x)
            # conversion of each part costs at most half an ulp
            err = _U * abs(z) if track else None
            return cls(z.real, z.imag, err)
        z = complex(x)
        return cls(z.real, z.imag, 0.0 if track else None)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    def _combine(self, other, value: complex, radius_fn):
        if self.err is None and other.err is None:
            return ComplexApprox(value.real, value.imag)
        e1 = self.err or 0.0
        e2 = other.err or 0.0
        r = radius_fn(e1, e2) + 2 * _U * abs(value)
        return ComplexApprox(value.real, value.imag, r)

    def __add__(self, other):
        other = ComplexApprox.of(other)
        return self._combine(other, self.value + other.value, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        other = ComplexApprox.of(other)
        return self._combine(other, self.value - other.value, lambda a, b: a + b)

    def __neg__(self):
        return ComplexApprox(-self.re, -self.im, self.err)

    def __mul__(self, other):
        other = ComplexApprox.of(other)
        x, y = abs(self), abs(other)
        return self._combine(other, self.value * other.value, lambda a, b: x * b + y * a + a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ComplexApprox.of(other)
        y = abs(other)
        e = other.err or 0.0
        if y == 0.0 or (other.err is not None and y <= e):
            raise ZeroDivisionError("divisor contains zero")
        x = abs(self)
        # |x/y - x'/y'| <= (a*y + x*b) / (y * (y - b))
        return self._combine(other, self.value / other.value,
                             lambda a, b: (a * y + x * b) / (y * (y - b)))

    def __complex__(self):
        return self.value


def _horner(coeffs, z: ComplexApprox, track: bool) -> ComplexApprox:
    acc = ComplexApprox.of(0, track)
    for c in reversed(coeffs):
        acc = acc * z + ComplexApprox.of(c, track)
    return acc


def eval_at(f, z0, track: bool | None = None) -> ComplexApprox:
    """Evaluate a rational function numerically.

    Tracking is on when ``track`` is true or when ``z0`` already carries an error
    radius. Raises :class:`PoleEvaluation` if the denominator value is zero, or
    not separated from zero by its error radius.
    """
    z0 = z0 if isinstance(z0, ComplexApprox) else ComplexApprox.of(z0)
    if track is None:
        track = z0.err is not None
    z0 = ComplexApprox.of(z0, track)
    num = _horner(f.num.coeffs, z0, track)
    den = _horner(f.den.coeffs, z0, track)
    if abs(den) == 0.0 or (den.err is not None and abs(den) <= den.err):
        raise PoleEvaluation(f"denominator of {f} vanishes at {z0.value} within its error radius")
    return num / den
