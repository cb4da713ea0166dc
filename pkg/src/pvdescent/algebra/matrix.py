"""Matrices of rational functions over Q(i)."""

from __future__ import annotations

from functools import reduce

import numpy as np

from .gaussian import GaussianRational, as_gr
from .poly import Poly
from .ratfunc import RationalFunction

__all__ = ["RatFuncMatrix", "conjugate_matrix", "derivative"]

_ZERO_RF = RationalFunction.const(0)
_ONE_RF = RationalFunction.const(1)


def _lift(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Poly):
        return RationalFunction(x)
    return RationalFunction.const(as_gr(x))


class RatFuncMatrix:
    """Immutable rows x cols grid of :class:`RationalFunction` entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(tuple(_lift(e) for e in row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("matrix must have at least one row and one column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix rows")
        self.entries = rows

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self):
        return self.rows, self.cols

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, idx):
        r, c = idx
        return self.entries[r][c]

    @classmethod
    def identity(cls, n: int) -> "RatFuncMatrix":
        return cls([[_ONE_RF if r == c else _ZERO_RF for c in range(n)] for r in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatFuncMatrix":
        return cls([[_ZERO_RF] * cols for _ in range(rows)])

    @classmethod
    def constant(cls, values) -> "RatFuncMatrix":
        return cls([[RationalFunction.const(as_gr(v)) for v in row] for row in values])

    # --- structure -------------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, RatFuncMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        from .printer import format_matrix

        return f"RatFuncMatrix({format_matrix(self, multiline=False)!r})"

    def __str__(self):
        from .printer import format_matrix

        return format_matrix(self)

    def map(self, fn) -> "RatFuncMatrix":
        return RatFuncMatrix([[fn(e) for e in row] for row in self.entries])

    def transpose(self) -> "RatFuncMatrix":
        return RatFuncMatrix(list(zip(*self.entries)))

    def is_constant(self) -> bool:
        return all(e.is_const() for row in self.entries for e in row)

    def is_real(self) -> bool:
        return all(e.is_real() for row in self.entries for e in row)

    def constant_values(self):
        return [[e.constant_value() for e in row] for row in self.entries]

    # --- arithmetic ------------------------------------------------------------------
    def _check_same(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "RatFuncMatrix") -> "RatFuncMatrix":
        self._check_same(other)
        return RatFuncMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other: "RatFuncMatrix") -> "RatFuncMatrix":
        self._check_same(other)
        return RatFuncMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, c) -> "RatFuncMatrix":
        c = _lift(c)
        return self.map(lambda e: e * c)

    def __matmul__(self, other: "RatFuncMatrix") -> "RatFuncMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.entries))
        out = []
        for row in self.entries:
            out.append([
                reduce(lambda acc, t: acc + t, (a * b for a, b in zip(row, col) if a and b), _ZERO_RF)
                for col in cols
            ])
        return RatFuncMatrix(out)

    def _elimination(self):
        """Gauss-Jordan on [self | I]; returns (det, inverse or None)."""
        if not self.is_square():
            raise ValueError("determinant/inverse need a square matrix")
        n = self.rows
        aug = [list(row) + [_ONE_RF if r == c else _ZERO_RF for c in range(n)]
               for r, row in enumerate(self.entries)]
        det = _ONE_RF
        for col in range(n):
            pivot = next((r for r in range(col, n) if aug[r][col]), None)
            if pivot is None:
                return _ZERO_RF, None
            if pivot != col:
                aug[col], aug[pivot] = aug[pivot], aug[col]
                det = -det
            p = aug[col][col]
            det = det * p
            inv_p = p.inverse()
            aug[col] = [e * inv_p for e in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        return det, RatFuncMatrix([row[n:] for row in aug])

    def det(self) -> RationalFunction:
        return self._elimination()[0]

    def inverse(self) -> "RatFuncMatrix":
        det, inv = self._elimination()
        if inv is None:
            raise ZeroDivisionError("matrix is singular over Q(i)(z)")
        return inv

    # --- calculus, conjugation -------------------------------------------------------
    def derivative(self) -> "RatFuncMatrix":
        return self.map(lambda e: e.derivative())

    def conjugate(self) -> "RatFuncMatrix":
        return self.map(lambda e: e.conjugate())

    def common_denominator(self) -> Poly:
        from .poly import poly_gcd

        den = Poly.const(1)
        for row in self.entries:
            for e in row:
                if not e.den.is_const():
                    g = poly_gcd(den, e.den)
                    den = den * e.den.exact_div(g)
        return den

    def poles(self) -> np.ndarray:
        """Numerical poles: roots of the squarefree part of the least common denominator.

        Repeated factors are removed exactly first (p / gcd(p, p')), so a double
        pole yields one point instead of a cluster of perturbed roots. The
        companion-matrix roots are then polished by two Newton steps.
        """
        from .poly import poly_gcd

        den = self.common_denominator()
        if den.degree < 1:
            return np.zeros(0, dtype=complex)
        g = poly_gcd(den, den.derivative())
        if not g.is_const():
            den = den.exact_div(g)
        c = np.asarray(den.to_complex(), dtype=complex)[::-1]
        roots = np.roots(c).astype(complex)
        dc = np.polyder(c)
        for _ in range(2):
            d = np.polyval(dc, roots)
            roots = np.where(d != 0, roots - np.polyval(c, roots) / np.where(d != 0, d, 1), roots)
        return roots

    def evaluate(self, z) -> np.ndarray:
        """Floating value at a point (exact evaluation, then rounded)."""
        z = as_gr(z) if not isinstance(z, GaussianRational) else z
        return np.array([[complex(e(z)) for e in row] for row in self.entries], dtype=complex)


def conjugate_matrix(A: RatFuncMatrix) -> RatFuncMatrix:
    """Conjugate every coefficient of every entry (the action of complex conjugation on A)."""
    return A.conjugate()


def derivative(A: RatFuncMatrix) -> RatFuncMatrix:
    return A.derivative()
