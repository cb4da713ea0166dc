"""Fraction-free Gaussian-rational matrices: Gaussian-integer entries over one denominator.

Long exact recursions (series coefficients, their verification) produce
entries with thousands of bits. Normalizing every intermediate rational costs
a gcd per operation; here a matrix carries a single positive denominator and
entries are plain big integers, so products are gcd-free and reduction happens
once per matrix when asked for.
"""

from __future__ import annotations

from functools import reduce

from gmpy2 import gcd, lcm, mpq, mpz

from .gaussian import _gr, as_gr

__all__ = ["ScaledMatrix"]


class ScaledMatrix:
    """(re + i*im) / den with re, im lists of lists of mpz and den > 0."""

    __slots__ = ("re", "im", "den")

    def __init__(self, re, im, den):
        self.re, self.im, self.den = re, im, den

    @classmethod
    def from_gr(cls, rows) -> "ScaledMatrix":
        rows = [[as_gr(x) for x in row] for row in rows]
        den = reduce(lcm, (q.denominator for row in rows for x in row for q in (x.re, x.im)), mpz(1))
        re = [[mpz(x.re * den) for x in row] for row in rows]
        im = [[mpz(x.im * den) for x in row] for row in rows]
        return cls(re, im, den)

    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "ScaledMatrix":
        m = n if m is None else m
        return cls([[mpz(0)] * m for _ in range(n)], [[mpz(0)] * m for _ in range(n)], mpz(1))

    @property
    def shape(self):
        return len(self.re), len(self.re[0]) if self.re else 0

    def to_gr(self):
        d = self.den
        return [[_gr(mpq(a, d), mpq(b, d)) for a, b in zip(ra, ia)] for ra, ia in zip(self.re, self.im)]

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        oc_re = list(zip(*other.re))
        oc_im = list(zip(*other.im))
        re, im = [], []
        for ar, ai in zip(self.re, self.im):
            rr, ri = [], []
            for br, bi in zip(oc_re, oc_im):
                sr = si = mpz(0)
                for x, y, u, v in zip(ar, ai, br, bi):
                    sr += x * u - y * v
                    si += x * v + y * u
                rr.append(sr)
                ri.append(si)
            re.append(rr)
            im.append(ri)
        return ScaledMatrix(re, im, self.den * other.den)

    def __add__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        L = lcm(self.den, other.den)
        f, g = L // self.den, L // other.den
        re = [[f * a + g * b for a, b in zip(ra, rb)] for ra, rb in zip(self.re, other.re)]
        im = [[f * a + g * b for a, b in zip(ra, rb)] for ra, rb in zip(self.im, other.im)]
        return ScaledMatrix(re, im, L)

    def __neg__(self) -> "ScaledMatrix":
        return ScaledMatrix([[-a for a in r] for r in self.re], [[-a for a in r] for r in self.im], self.den)

    def __sub__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        return self + (-other)

    def scale(self, c) -> "ScaledMatrix":
        """Multiply by a Gaussian rational scalar."""
        c = as_gr(c)
        q = lcm(c.re.denominator, c.im.denominator)
        a, b = mpz(c.re * q), mpz(c.im * q)
        re = [[a * x - b * y for x, y in zip(rr, ri)] for rr, ri in zip(self.re, self.im)]
        im = [[a * y + b * x for x, y in zip(rr, ri)] for rr, ri in zip(self.re, self.im)]
        return ScaledMatrix(re, im, self.den * q)

    def reduced(self) -> "ScaledMatrix":
        g = self.den
        for row in self.re + self.im:
            for x in row:
                if g == 1:
                    return self
                g = gcd(g, x)
        if g == 1:
            return self
        return ScaledMatrix([[x // g for x in r] for r in self.re], [[x // g for x in r] for r in self.im],
                            self.den // g)

    def is_zero(self) -> bool:
        return not any(x for row in self.re + self.im for x in row)

    def __eq__(self, other):
        if not isinstance(other, ScaledMatrix):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None
