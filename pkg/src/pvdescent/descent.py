"""Gauge equivalence, Galois descent from C(z) to R(z), and cocycle twisting.

The descent map ``mu`` sends an element x of the complex field to the matrix of
"multiplication by x" in the basis (1, i): a + b*i  ->  [[a, -b], [b, a]].
Applied entrywise it turns an n x n system over Q(i)(z) into a 2n x 2n system
with real coefficients; it commutes with d/dz because the basis is constant.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .algebra import GaussianRational, Poly, RatFuncMatrix, RationalFunction, as_gr, conjugate_matrix
from .algebra.gaussian import ONE, ZERO
from .errors import InputError, NotDescendable, SingularGauge
from .series import SeriesMatrix, _ex_det

__all__ = [
    "GaugeTransform",
    "Cocycle",
    "gauge_transform",
    "check_equivalence",
    "find_constant_gauge",
    "mu",
    "mu_matrix",
    "mu_constant",
    "block_series",
    "mu_descend",
    "DescentReport",
    "descent_report",
]


@dataclass(frozen=True)
class GaugeTransform:
    C: RatFuncMatrix

    def __post_init__(self):
        if not self.C.is_square():
            raise InputError("gauge matrix must be square")
        if not self.C.det():
            raise SingularGauge("gauge matrix has zero determinant in Q(i)(z)")


def _as_gauge(C) -> RatFuncMatrix:
    if isinstance(C, GaugeTransform):
        return C.C
    if isinstance(C, RatFuncMatrix):
        if not C.is_square() or not C.det():
            raise SingularGauge("gauge matrix has zero determinant in Q(i)(z)")
        return C
    return GaugeTransform(RatFuncMatrix.constant(C)).C


def gauge_transform(A: RatFuncMatrix, C) -> RatFuncMatrix:
    """B = C^-1 A C - C^-1 dC/dz; a fundamental matrix of B is C^-1 W."""
    C = _as_gauge(C)
    if A.shape != C.shape:
        raise InputError(f"shape mismatch {A.shape} vs {C.shape}")
    Ci = C.inverse()
    B = Ci @ A @ C
    if not C.is_constant():
        B = B - Ci @ C.derivative()
    return B


def check_equivalence(A: RatFuncMatrix, B: RatFuncMatrix, C) -> bool:
    if A.shape != B.shape:
        raise InputError("systems must have the same shape")
    return gauge_transform(A, C) == B


# --------------------------------------------------------------------------------------
# exact linear algebra over Q(i) for the constant-gauge search

def _nullspace(rows, ncols):
    """Basis of {x : M x = 0} for M given as a list of rows (GaussianRational)."""
    M = [list(r) for r in rows if any(r)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(M)) if M[k][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv for x in M[r]]
        for k in range(len(M)):
            if k != r and M[k][c]:
                f = M[k][c]
                M[k] = [x - f * y for x, y in zip(M[k], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for row_idx, pc in enumerate(pivots):
            v[pc] = -M[row_idx][f]
        basis.append(v)
    return basis


def find_constant_gauge(A: RatFuncMatrix, B: RatFuncMatrix, seed: int = 0, tries: int = 64):
    """Invertible constant C with A C = C B (so that gauge_transform(A, C) = B), or None."""
    if A.shape != B.shape or not A.is_square():
        raise InputError("systems must be square and of the same shape")
    n = A.rows
    if A == B:
        return GaugeTransform(RatFuncMatrix.identity(n))
    D = RatFuncMatrix([list(A.entries[r]) + list(B.entries[r]) for r in range(n)]).common_denominator()
    Dr = RationalFunction(D)
    Ap = [[(e * Dr).num for e in row] for row in A.entries]
    Bp = [[(e * Dr).num for e in row] for row in B.entries]
    # unknown c[k*n + l] = C[k][l]; entry (r, s) of (A C - C B) * D
    equations = []
    for r in range(n):
        for s in range(n):
            polys = [Poly() for _ in range(n * n)]
            for k in range(n):
                polys[k * n + s] = polys[k * n + s] + Ap[r][k]
            for l in range(n):
                polys[r * n + l] = polys[r * n + l] - Bp[l][s]
            deg = max(p.degree for p in polys)
            for d in range(deg + 1):
                equations.append([p.coeff(d) for p in polys])
    basis = _nullspace(equations, n * n)
    if not basis:
        return None

    def as_mat(v):
        return [v[k * n:(k + 1) * n] for k in range(n)]

    candidates = [[sum((b[i] for b in basis), ZERO) for i in range(n * n)]] + basis
    rng = random.Random(seed)
    for _ in range(tries):
        w = [rng.randint(-3, 3) for _ in basis]
        candidates.append([sum((wi * b[i] for wi, b in zip(w, basis)), ZERO) for i in range(n * n)])
    for v in candidates:
        Cm = as_mat(v)
        if _ex_det(Cm):
            return GaugeTransform(RatFuncMatrix.constant(Cm))
    return None


# --------------------------------------------------------------------------------------
# the block map

def mu(f: RationalFunction) -> RatFuncMatrix:
    a, b = f.real_imag()
    return RatFuncMatrix([[a, -b], [b, a]])


def mu_matrix(A: RatFuncMatrix) -> RatFuncMatrix:
    """Entrywise block map; entry (r, c) lands in rows 2r..2r+1, columns 2c..2c+1."""
    out = [[None] * (2 * A.cols) for _ in range(2 * A.rows)]
    for r, row in enumerate(A.entries):
        for c, e in enumerate(row):
            a, b = e.real_imag()
            out[2 * r][2 * c], out[2 * r][2 * c + 1] = a, -b
            out[2 * r + 1][2 * c], out[2 * r + 1][2 * c + 1] = b, a
    return RatFuncMatrix(out)


def mu_constant(M) -> np.ndarray | list:
    """Block map of a constant matrix: complex array in, real array out; exact in, exact out."""
    if isinstance(M, np.ndarray):
        n, m = M.shape
        out = np.zeros((2 * n, 2 * m))
        out[0::2, 0::2] = M.real
        out[0::2, 1::2] = -M.imag
        out[1::2, 0::2] = M.imag
        out[1::2, 1::2] = M.real
        return out
    rows = [[as_gr(x) for x in row] for row in M]
    out = [[ZERO] * (2 * len(rows[0])) for _ in range(2 * len(rows))]
    for r, row in enumerate(rows):
        for c, x in enumerate(row):
            a, b = GaussianRational(x.re, 0), GaussianRational(x.im, 0)
            out[2 * r][2 * c], out[2 * r][2 * c + 1] = a, -b
            out[2 * r + 1][2 * c], out[2 * r + 1][2 * c + 1] = b, a
    return out


def block_series(W: SeriesMatrix) -> SeriesMatrix:
    """Apply the block map coefficientwise to a series expanded at a real point."""
    if W.exact:
        if not as_gr(W.center).is_real():
            raise InputError("block transport needs a real expansion point")
        coeffs = tuple(tuple(tuple(r) for r in mu_constant(Wk)) for Wk in W.coeffs)
        return SeriesMatrix(W.center, coeffs, W.radius_hint, exact=True)
    if complex(W.center).imag != 0:
        raise InputError("block transport needs a real expansion point")
    return SeriesMatrix(W.center, np.array([mu_constant(Wk) for Wk in W.coeffs]), W.radius_hint)


# --------------------------------------------------------------------------------------
# cocycles and descent

@dataclass(frozen=True)
class Cocycle:
    """Image chi of complex conjugation; must satisfy chi * conj(chi) = I."""

    chi: tuple

    def __post_init__(self):
        m = tuple(tuple(as_gr(x) for x in row) for row in self.chi)
        object.__setattr__(self, "chi", m)
        n = len(m)
        if any(len(row) != n for row in m):
            raise InputError("cocycle matrix must be square")
        prod = [[sum((m[r][k] * m[k][c].conjugate() for k in range(n)), ZERO) for c in range(n)]
                for r in range(n)]
        if any(prod[r][c] != (ONE if r == c else ZERO) for r in range(n) for c in range(n)):
            raise InputError("cocycle condition chi * conj(chi) = I fails")

    @classmethod
    def trivial(cls, n: int) -> "Cocycle":
        return cls([[ONE if r == c else ZERO for c in range(n)] for r in range(n)])

    @classmethod
    def from_matrix(cls, M: RatFuncMatrix) -> "Cocycle":
        if not M.is_constant():
            raise InputError("cocycle must be a constant matrix")
        return cls(M.constant_values())

    @property
    def size(self) -> int:
        return len(self.chi)

    def is_trivial(self) -> bool:
        n = self.size
        return all(self.chi[r][c] == (ONE if r == c else ZERO) for r in range(n) for c in range(n))

    def splitting(self):
        """Invertible P with chi = P conj(P)^-1 (P = Q + chi conj(Q) for a suitable Q)."""
        n = self.size
        candidates = [
            [[ONE if r == c else ZERO for c in range(n)] for r in range(n)],
            [[GaussianRational(0, 1) if r == c else ZERO for c in range(n)] for r in range(n)],
        ]
        # diagonal matrices mixing 1 and i, then small deterministic random ones
        for mask in range(1, 2 ** n):
            candidates.append([[(GaussianRational(0, 1) if (mask >> r) & 1 else ONE) if r == c else ZERO
                                for c in range(n)] for r in range(n)])
        rng = random.Random(0)
        for _ in range(64):
            candidates.append([[GaussianRational(rng.randint(-2, 2), rng.randint(-2, 2))
                                for _ in range(n)] for _ in range(n)])
        for Q in candidates:
            P = [[Q[r][c] + sum((self.chi[r][k] * Q[k][c].conjugate() for k in range(n)), ZERO)
                  for c in range(n)] for r in range(n)]
            if _ex_det(P):
                return P
        raise InputError("could not split the cocycle")  # unreachable for a valid cocycle


def mu_descend(A: RatFuncMatrix, chi: Cocycle | None = None) -> RatFuncMatrix:
    """Real 2n x 2n system obtained from A by (optional) twisting and the block map.

    For a nontrivial cocycle the representative P^-1 A P is used, with P splitting
    chi; it must have real coefficients, else :class:`NotDescendable`.
    """
    if not A.is_square():
        raise InputError("system matrix must be square")
    rep = A
    if chi is not None and not chi.is_trivial():
        if chi.size != A.rows:
            raise InputError("cocycle size does not match the system")
        P = RatFuncMatrix.constant(chi.splitting())
        rep = P.inverse() @ A @ P
        if not rep.is_real():
            raise NotDescendable("twisted representative is not real: the system is not "
                                 "compatible with the twisted conjugation")
    out = mu_matrix(rep)
    if not out.is_real():
        raise NotDescendable("block image has non-real coefficients")
    return out


@dataclass
class DescentReport:
    verdict: str
    descendable: bool
    certificate: RatFuncMatrix | None
    exact_check: bool | None
    monodromy_residual: float | None = None
    loops: int = 0
    tol: float | None = None
    notes: list = field(default_factory=list)

    @property
    def validated(self) -> bool:
        if not self.descendable or not self.exact_check:
            return False
        return self.monodromy_residual is None or self.monodromy_residual < self.tol

    def to_text(self, digits: int = 15) -> str:
        lines = [f"verdict: {self.verdict}", f"descendable: {'yes' if self.descendable else 'no'}"]
        if self.certificate is not None:
            lines.append("certificate:")
            lines.extend("  " + ln for ln in str(self.certificate).splitlines())
        if self.exact_check is not None:
            lines.append(f"exact gauge check: {'pass' if self.exact_check else 'fail'}")
        if self.monodromy_residual is not None:
            lines.append(f"monodromy cross-check residual: {self.monodromy_residual:.{digits}g} "
                         f"over {self.loops} loops (tol {self.tol:.3g})")
        lines.extend(f"note: {n}" for n in self.notes)
        lines.append(f"certificate validated: {'yes' if self.validated else 'no'}")
        return "\n".join(lines)


def descent_report(A: RatFuncMatrix, tol_mono: float = 1e-8, order: int = 64,
                   step_fraction: float = 0.5, numeric: bool = True) -> DescentReport:
    """Decide whether A is (constant-)gauge equivalent to its conjugate and cross-check numerically."""
    from .monodromy import monodromy_rep, standard_loops

    tauA = conjugate_matrix(A)
    n = A.rows
    if tauA == A:
        rep = DescentReport("descends: trivially (real coefficients)", True, RatFuncMatrix.identity(n),
                            True, tol=tol_mono)
        C = rep.certificate
    else:
        g = find_constant_gauge(A, tauA)
        if g is None:
            return DescentReport("not descendable by constant gauge", False, None, None, tol=tol_mono,
                                 notes=["no invertible constant C with A C = C conj(A)"])
        C = g.C
        rep = DescentReport("descendable", True, C, check_equivalence(A, tauA, C), tol=tol_mono)
    if not numeric:
        return rep
    poles = list(A.poles())
    if not poles:
        rep.notes.append("no finite singularities: monodromy is trivial")
        return rep
    sym = poles + [p.conjugate() for p in poles]
    uniq = []
    for p in sym:
        if all(abs(p - q) > 1e-9 * max(1.0, abs(p)) for q in uniq):
            uniq.append(p)
    loops = standard_loops(uniq)
    rA = monodromy_rep(A, loops, order, step_fraction, tol_mono)
    rT = monodromy_rep(tauA, loops, order, step_fraction, tol_mono)
    Cn = C.evaluate(0) if C.is_constant() else None
    Ci = np.linalg.inv(Cn)
    rep.monodromy_residual = max(float(np.max(np.abs(t - Ci @ m @ Cn)))
                                 for m, t in zip(rA.matrices, rT.matrices))
    rep.loops = len(loops)
    return rep
