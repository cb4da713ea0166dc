"""Dense univariate polynomials in z over the Gaussian rationals.

Coefficients are kept lowest degree first with trailing zeros stripped, so the
zero polynomial is the empty tuple and structural equality is mathematical
equality.
"""

from __future__ import annotations

from functools import reduce
from math import comb, gcd, lcm

from gmpy2 import mpq

from .gaussian import ONE, ZERO, GaussianRational, _gr, as_gr

__all__ = ["Poly", "poly_gcd"]


def _strip(coeffs):
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return tuple(coeffs)


class Poly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        self.coeffs = _strip(as_gr(c) for c in coeffs)

    @classmethod
    def _raw(cls, coeffs) -> "Poly":
        p = object.__new__(cls)
        p.coeffs = _strip(coeffs)
        return p

    @classmethod
    def const(cls, c) -> "Poly":
        return cls._raw((as_gr(c),))

    @classmethod
    def z(cls) -> "Poly":
        return cls._raw((ZERO, ONE))

    @classmethod
    def linear_root(cls, s) -> "Poly":
        """The monic polynomial z - s."""
        return cls._raw((-as_gr(s), ONE))

    # --- basic queries ------------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def __bool__(self):
        return bool(self.coeffs)

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    def lc(self) -> GaussianRational:
        return self.coeffs[-1] if self.coeffs else ZERO

    def coeff(self, k: int) -> GaussianRational:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else ZERO

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]})"

    # --- ring operations ----------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly._raw([x + y for x, y in zip(a, b)] + list(a[len(b):]))

    def __neg__(self) -> "Poly":
        return Poly._raw([-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = as_gr(other)
            return Poly._raw([x * c for x in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly._raw(())
        out = [ZERO] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
        return Poly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        result, base = Poly.const(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divmod(self, other: "Poly"):
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = other.degree
        inv_lc = other.lc().inverse()
        if len(rem) <= db:
            return Poly._raw(()), self
        quot = [ZERO] * (len(rem) - db)
        for k in range(len(rem) - 1, db - 1, -1):
            c = rem[k] * inv_lc
            quot[k - db] = c
            if c:
                for j, y in enumerate(other.coeffs):
                    rem[k - db + j] = rem[k - db + j] - c * y
        return Poly._raw(quot), Poly._raw(rem[:db])

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError("polynomial division is not exact")
        return q

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        return self * self.lc().inverse()

    # --- calculus and evaluation ----------------------------------------------------
    def derivative(self) -> "Poly":
        return Poly._raw([c * k for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        acc = ZERO if isinstance(x, GaussianRational) else 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def taylor_shift(self, c) -> "Poly":
        """Coefficients of p(c + t) as a polynomial in t."""
        c = as_gr(c)
        n = len(self.coeffs)
        powers = [ONE]
        for _ in range(n):
            powers.append(powers[-1] * c)
        out = []
        for j in range(n):
            acc = ZERO
            for k in range(j, n):
                a = self.coeffs[k]
                if a:
                    acc = acc + a * powers[k - j] * comb(k, j)
            out.append(acc)
        return Poly._raw(out)

    def conjugate(self) -> "Poly":
        return Poly._raw([c.conjugate() for c in self.coeffs])

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.coeffs)

    def real_part(self) -> "Poly":
        return Poly._raw([_gr(c.re, mpq(0)) for c in self.coeffs])

    def imag_part(self) -> "Poly":
        return Poly._raw([_gr(c.im, mpq(0)) for c in self.coeffs])

    def to_complex(self):
        return [complex(c) for c in self.coeffs]


# --- fraction-free gcd over Z[i] ------------------------------------------------------
# Gaussian integers are (a, b) pairs of Python ints.

def _gi_mul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _gi_sub(x, y):
    return (x[0] - y[0], x[1] - y[1])


def _gi_divmod(x, y):
    """Nearest-integer division in Z[i]; remainder has smaller norm than y."""
    n = y[0] * y[0] + y[1] * y[1]
    num = _gi_mul(x, (y[0], -y[1]))
    q = ((2 * num[0] + n) // (2 * n), (2 * num[1] + n) // (2 * n))
    return q, _gi_sub(x, _gi_mul(q, y))


def _gi_gcd(x, y):
    while y != (0, 0):
        _, r = _gi_divmod(x, y)
        x, y = y, r
    return x


def _gi_exact_div(x, y):
    q, r = _gi_divmod(x, y)
    assert r == (0, 0)
    return q


def _clear_denominators(p: Poly):
    den = reduce(lcm, (int(q.denominator) for c in p.coeffs for q in (c.re, c.im)), 1)
    return [(int(c.re * den), int(c.im * den)) for c in p.coeffs]


def _primitive(coeffs):
    content = reduce(_gi_gcd, coeffs, (0, 0))
    if content == (0, 0):
        return coeffs
    return [_gi_exact_div(c, content) for c in coeffs]


def _prem(f, g):
    """Pseudo-remainder of f by g over Z[i] (lists lowest degree first)."""
    r = list(f)
    dg = len(g) - 1
    lc = g[-1]
    while len(r) - 1 >= dg and r:
        c = r[-1]
        shift = len(r) - 1 - dg
        r = [_gi_mul(lc, x) for x in r]
        for j, y in enumerate(g):
            r[shift + j] = _gi_sub(r[shift + j], _gi_mul(c, y))
        while r and r[-1] == (0, 0):
            r.pop()
    return r


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd via the primitive pseudo-remainder sequence on cleared denominators."""
    if not f:
        return g.monic()
    if not g:
        return f.monic()
    a = _primitive(_clear_denominators(f))
    b = _primitive(_clear_denominators(g))
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _prem(a, b)
        a, b = b, (_primitive(r) if r else [])
    return Poly(GaussianRational(x, y) for x, y in a).monic()
