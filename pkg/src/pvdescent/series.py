"""Truncated power-series fundamental matrices at ordinary points.

With t = z - center, A = A_0 + A_1 t + ... and W = W_0 + W_1 t + ..., the
condition dW/dz = A W is equivalent to

    i * W_i = sum_{j + k = i - 1} A_j W_k        (i >= 1),

which determines W uniquely from W_0. Coefficients are computed either exactly
over Q(i) or in complex floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .algebra import ComplexApprox, GaussianRational, RatFuncMatrix, as_gr
from .algebra.gaussian import ONE, ZERO
from .algebra.scaled import ScaledMatrix
from .errors import InputError, OutOfDisk, PoleEvaluation, SingularInitial

__all__ = [
    "DEFAULT_ORDER",
    "DEFAULT_STEP_FRACTION",
    "SeriesMatrix",
    "NumericSystem",
    "as_numeric",
    "local_expand",
    "fundamental_series",
    "evaluate_series",
    "recursion_residual",
    "defining_equation_residual",
    "radius_hint",
]

DEFAULT_ORDER = 64
DEFAULT_STEP_FRACTION = 0.5


# --------------------------------------------------------------------------------------
# exact helpers (nested lists of GaussianRational)

def _ex_zero(n, m=None):
    return [[ZERO] * (n if m is None else m) for _ in range(n)]


def _ex_matmul(a, b):
    cols = list(zip(*b))
    out = []
    for row in a:
        out_row = []
        for col in cols:
            acc = ZERO
            for x, y in zip(row, col):
                if x and y:
                    acc = acc + x * y
            out_row.append(acc)
        out.append(out_row)
    return out


def _ex_add_into(acc, b):
    for r, row in enumerate(b):
        arow = acc[r]
        for c, y in enumerate(row):
            if y:
                arow[c] = arow[c] + y


def _ex_det(m):
    n = len(m)
    a = [list(r) for r in m]
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det = det * p
        inv = p.inverse()
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def _ex_series_div(num, den, order):
    """First ``order`` Taylor coefficients of num(t)/den(t) (coefficient lists)."""
    d0 = den[0]
    inv = d0.inverse()
    out = []
    for m in range(order):
        acc = num[m] if m < len(num) else ZERO
        for j in range(1, min(m, len(den) - 1) + 1):
            e = out[m - j]
            if e and den[j]:
                acc = acc - den[j] * e
        out.append(acc * inv)
    return out


# --------------------------------------------------------------------------------------
# numeric systems

class NumericSystem:
    """Floating view of a :class:`RatFuncMatrix`, for fast Taylor expansion."""

    def __init__(self, A: RatFuncMatrix):
        if not A.is_square():
            raise InputError("system matrix must be square")
        self.matrix = A
        self.size = A.rows
        n = self.size
        dn = max(e.num.degree for row in A.entries for e in row)
        dd = max(e.den.degree for row in A.entries for e in row)
        self._num = np.zeros((n, n, max(dn, 0) + 1), dtype=complex)
        self._den = np.zeros((n, n, dd + 1), dtype=complex)
        for r, row in enumerate(A.entries):
            for c, e in enumerate(row):
                nc = e.num.to_complex()
                self._num[r, c, : len(nc)] = nc
                dc = e.den.to_complex()
                self._den[r, c, : len(dc)] = dc
        self.poles = A.poles()

    @staticmethod
    def _shift(p: np.ndarray, c: complex) -> np.ndarray:
        deg = p.shape[-1]
        T = np.zeros((deg, deg), dtype=complex)
        for j in range(deg):
            for k in range(j, deg):
                T[j, k] = comb(k, j) * c ** (k - j)
        return p @ T.T

    def taylor(self, center: complex, order: int) -> np.ndarray:
        """Taylor coefficients A_0..A_{order-1} at ``center``; shape (order, n, n)."""
        center = complex(center)
        num = self._shift(self._num, center)
        den = self._shift(self._den, center)
        d0 = den[..., 0]
        scale = np.abs(den).sum(axis=-1)
        if np.any(np.abs(d0) <= 1e-14 * scale):
            raise PoleEvaluation(f"expansion point {center} is a pole of the system")
        out = np.zeros((order, self.size, self.size), dtype=complex)
        dd = den.shape[-1] - 1
        for m in range(order):
            acc = num[..., m].copy() if m < num.shape[-1] else np.zeros_like(d0)
            for j in range(1, min(m, dd) + 1):
                acc -= den[..., j] * out[m - j]
            out[m] = acc / d0
        return out

    def conjugate(self) -> "NumericSystem":
        return NumericSystem(self.matrix.conjugate())


def as_numeric(system):
    """Accept a RatFuncMatrix or anything exposing ``taylor``/``poles``/``size``."""
    if isinstance(system, RatFuncMatrix):
        return NumericSystem(system)
    if hasattr(system, "taylor") and hasattr(system, "poles"):
        return system
    raise TypeError(f"not a differential system: {type(system).__name__}")


def radius_hint(system, center) -> float:
    poles = as_numeric(system).poles if not isinstance(system, np.ndarray) else system
    if len(poles) == 0:
        return math.inf
    return float(np.min(np.abs(np.asarray(poles) - complex(center))))


# --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesMatrix:
    """W = sum_k coeffs[k] * (z - center)^k, truncated at ``order`` terms.

    In exact mode ``coeffs`` is a tuple of nested tuples of GaussianRational;
    in float mode it is a complex array of shape (order, n, n).
    """

    center: object
    coeffs: object
    radius_hint: float
    exact: bool = False

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def size(self) -> int:
        return len(self.coeffs[0])

    def as_array(self) -> np.ndarray:
        if not self.exact:
            return self.coeffs
        return np.array([[[complex(x) for x in row] for row in W] for W in self.coeffs])


def local_expand(A: RatFuncMatrix, center, order: int, exact: bool = False):
    """Taylor coefficients A_0..A_{order-1} of A at ``center``.

    Exact mode needs a Gaussian-rational center and returns nested lists;
    float mode returns an array of shape (order, n, n).
    """
    if not exact:
        return as_numeric(A).taylor(complex(center), order)
    c = as_gr(center)
    n, m = A.shape
    coeffs = [_ex_zero(n, m) for _ in range(order)]
    for r, row in enumerate(A.entries):
        for col, e in enumerate(row):
            num = list(e.num.taylor_shift(c).coeffs)
            den = list(e.den.taylor_shift(c).coeffs)
            if not den[0]:
                raise PoleEvaluation(f"{c} is a pole of entry ({r}, {col})")
            for k, v in enumerate(_ex_series_div(num, den, order)):
                coeffs[k][r][col] = v
    return coeffs


def fundamental_series(A: RatFuncMatrix, center, order: int = DEFAULT_ORDER, W0=None,
                       exact: bool = False) -> SeriesMatrix:
    """Solve dW/dz = A W as a power series at an ordinary point."""
    if not A.is_square():
        raise InputError("system matrix must be square")
    n = A.rows
    Acoef = local_expand(A, center, order, exact=exact)
    rad = radius_hint(A, complex(as_gr(center)) if exact else center)
    if exact:
        if W0 is None:
            W0 = [[ONE if r == c else ZERO for c in range(n)] for r in range(n)]
        W0 = [[as_gr(x) for x in row] for row in W0]
        if not _ex_det(W0):
            raise SingularInitial("initial matrix W0 is singular")
        As = [ScaledMatrix.from_gr(Aj) for Aj in Acoef]
        W = [ScaledMatrix.from_gr(W0)]
        for i in range(1, order):
            acc = ScaledMatrix.zeros(n)
            for j in range(i):
                acc = acc + As[j] @ W[i - 1 - j]
            acc.den *= i
            W.append(acc.reduced())
        W = [Wi.to_gr() for Wi in W]
        coeffs = tuple(tuple(tuple(row) for row in Wi) for Wi in W)
        return SeriesMatrix(as_gr(center), coeffs, rad, exact=True)

    W0 = np.eye(n, dtype=complex) if W0 is None else np.asarray(W0, dtype=complex)
    if W0.shape != (n, n) or np.linalg.cond(W0) > 1e14:
        raise SingularInitial("initial matrix W0 is singular or ill-conditioned")
    W = np.zeros((order, n, n), dtype=complex)
    W[0] = W0
    for i in range(1, order):
        W[i] = np.matmul(Acoef[:i], W[i - 1 :: -1][:i]).sum(axis=0) / i
    return SeriesMatrix(complex(center), W, rad, exact=False)


def _tail_estimate(term_norms) -> float:
    """Geometric estimate of the truncated tail from the last computed terms."""
    t = np.asarray(term_norms, dtype=float)
    if t[-1] == 0.0 and t[-2] == 0.0:
        return 0.0
    k = max(len(t) // 4, 2)
    last = t[-k:]
    if np.all(last <= 4 * np.finfo(float).eps * t.max()):
        return 0.0  # series terminated up to rounding
    ratios = last[1:] / np.maximum(last[:-1], np.finfo(float).tiny)
    q = float(np.max(ratios))
    if q >= 1.0:
        return math.inf
    return float(last[-1]) * q / (1.0 - q)


def evaluate_series(W: SeriesMatrix, point, step_fraction: float = DEFAULT_STEP_FRACTION,
                    track_error: bool = False):
    """Horner evaluation of W at ``point``.

    Returns the matrix, or ``(matrix, error_bound)`` when ``track_error`` is set.
    The bound combines a geometric tail estimate with a rounding allowance.
    """
    p = point.value if isinstance(point, ComplexApprox) else complex(point)
    c = complex(W.center)
    h = p - c
    if abs(h) >= step_fraction * W.radius_hint:
        raise OutOfDisk(
            f"|point - center| = {abs(h):.3g} exceeds {step_fraction} x radius {W.radius_hint:.3g}")
    coeffs = W.as_array()
    value = np.zeros(coeffs.shape[1:], dtype=complex)
    for Wk in coeffs[::-1]:
        value = value * h + Wk
    if not track_error:
        return value
    norms = np.linalg.norm(coeffs, ord=2, axis=(1, 2)) * np.abs(h) ** np.arange(len(coeffs))
    err = _tail_estimate(norms) + 4 * len(coeffs) * np.finfo(float).eps * float(norms.sum())
    if isinstance(point, ComplexApprox) and point.err:
        # first-order propagation of the input radius through the derivative series
        dnorms = np.arange(1, len(coeffs)) * norms[1:] / max(abs(h), 1e-300)
        err += point.err * float(dnorms.sum())
    return value, err


# --------------------------------------------------------------------------------------
# exact verification helpers (independent of the recursion code path)

def recursion_residual(A: RatFuncMatrix, W: SeriesMatrix):
    """Indices i for which  i*W_i != sum_{j+k=i-1} A_j W_k  (exact mode)."""
    Acoef = [ScaledMatrix.from_gr(Aj) for Aj in local_expand(A, W.center, W.order, exact=True)]
    Wc = [ScaledMatrix.from_gr(Wi) for Wi in W.coeffs]
    bad = []
    for i in range(1, W.order):
        rhs = ScaledMatrix.zeros(W.size)
        for j in range(i):
            rhs = rhs + Acoef[j] @ Wc[i - 1 - j]
        if Wc[i].scale(i) != rhs:
            bad.append(i)
    return bad


def defining_equation_residual(A: RatFuncMatrix, W: SeriesMatrix, upto: int | None = None):
    """Check D(z)*dW/dz - N(z)*W = 0 through t^upto, where A = N/D over a common denominator.

    Uses polynomial arithmetic only (no series division), so it is independent of
    :func:`local_expand`. Returns the list of degrees with a nonzero coefficient.
    """
    from .algebra import RationalFunction

    n = W.size
    upto = W.order - 2 if upto is None else upto
    D = A.common_denominator()
    c = W.center
    Dt = D.taylor_shift(c).coeffs
    Nt = [[(e * RationalFunction(D)).num.taylor_shift(c).coeffs for e in row] for row in A.entries]
    for e_row in A.entries:
        for e in e_row:
            assert (e * RationalFunction(D)).is_polynomial()
    # coefficient matrices of N(t) = sum_j N_j t^j
    Nmat = [ScaledMatrix.from_gr([[Nt[r][q][j] if j < len(Nt[r][q]) else ZERO for q in range(n)]
                                  for r in range(n)])
            for j in range(max(len(x) for row in Nt for x in row))]
    Wc = [ScaledMatrix.from_gr(Wi) for Wi in W.coeffs]
    bad = []
    for m in range(upto + 1):
        acc = ScaledMatrix.zeros(n)
        for j, d in enumerate(Dt):
            k = m - j
            if 0 <= k and k + 1 < len(Wc) and d:
                acc = acc + Wc[k + 1].scale(d * (k + 1))
        for j, Nj in enumerate(Nmat):
            k = m - j
            if 0 <= k < len(Wc):
                acc = acc - Nj @ Wc[k]
        if not acc.is_zero():
            bad.append(m)
    return bad
