"""Realize conjugate-symmetric monodromy data by a Fuchsian system.

Given generators C_1..C_r at points s_1..s_r in the upper half plane, the pole
set is doubled by conjugation and the loop around conj(s_k) is the mirror
image tau o alpha_k of the loop alpha_k around s_k, with target conj(C_k).
Residues are initialized as log(C_k) / (2 pi i) and refined by damped
Gauss-Newton on the upper-half-plane residues only; the residue at conj(s_k)
is always exactly conj(B_k), which makes A(z) = sum B_k / (z - s_k) real.
"""

from __future__ import annotations

import cmath
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import GaussianRational, Poly, RatFuncMatrix, RationalFunction
from .descent import descent_report, mu_constant, mu_descend
from .errors import InputError, LogBranchFailure, NoConvergence, PVDescentError
from .monodromy import (DEFAULT_TOL_MONO, MonodromyRep, check_conjugation_formula, monodromy_rep,
                        standard_loops)
from .series import DEFAULT_ORDER, DEFAULT_STEP_FRACTION

__all__ = [
    "FuchsianSystem",
    "TargetData",
    "matrix_log",
    "symmetrize_targets",
    "residue_ansatz",
    "refine",
    "Realization",
    "realize_and_descend",
    "real_system_monodromy",
]

TWO_PI_I = 2j * math.pi
MAX_POINTS = 3
MAX_SIZE = 3


@dataclass(frozen=True)
class FuchsianSystem:
    """A(z) = sum_k residues[k] / (z - poles[k])."""

    poles: tuple
    residues: tuple
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        res = tuple(np.array(B, dtype=complex) for B in self.residues)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", res)
        if len(poles) != len(res) or not poles:
            raise InputError("one residue matrix per pole is required")
        n = res[0].shape[0]
        if any(B.shape != (n, n) for B in res):
            raise InputError("residues must be square matrices of one size")
        for i, p in enumerate(poles):
            if any(p == q for q in poles[i + 1:]):
                raise InputError(f"repeated pole {p}")

    @property
    def size(self) -> int:
        return self.residues[0].shape[0]

    @property
    def poles_array(self) -> np.ndarray:
        return np.array(self.poles, dtype=complex)

    # the numeric-system protocol used by the monodromy engine
    @property
    def pole_set(self):
        return self.poles

    def taylor(self, center: complex, order: int) -> np.ndarray:
        d = complex(center) - self.poles_array
        if np.any(np.abs(d) == 0):
            from .errors import PoleEvaluation

            raise PoleEvaluation(f"{center} is a pole")
        m = np.arange(order)[:, None]
        # 1/(z - s) = 1/(d + t) = sum_m (-1)^m t^m / d^(m+1)
        coef = (-1.0 / d[None, :]) ** m / d[None, :]
        return np.einsum("mk,kab->mab", coef, np.array(self.residues))

    def conjugate(self) -> "FuchsianSystem":
        return FuchsianSystem(tuple(p.conjugate() for p in self.poles),
                              tuple(B.conj() for B in self.residues))

    def residue_at_infinity(self) -> np.ndarray:
        return -sum(self.residues)

    def conjugate_pairs(self):
        """Index pairs (k, j) with poles[j] == conj(poles[k]) and Im poles[k] > 0."""
        pairs = []
        for k, p in enumerate(self.poles):
            if p.imag > 0:
                j = next((j for j, q in enumerate(self.poles) if q == p.conjugate()), None)
                if j is None:
                    raise InputError(f"pole {p} has no conjugate partner")
                pairs.append((k, j))
        if 2 * len(pairs) != len(self.poles):
            raise InputError("conjugate-symmetric mode needs every pole off the real axis and paired")
        return pairs

    def is_conjugate_symmetric(self) -> bool:
        try:
            pairs = self.conjugate_pairs()
        except InputError:
            return False
        return all(np.array_equal(self.residues[j], self.residues[k].conj()) for k, j in pairs)

    def to_ratfunc(self, digits: int = 15) -> RatFuncMatrix:
        """Exact matrix over Q(i)(z) with poles and residues rounded to ``digits`` significant digits.

        Rounding is done on the upper-half-plane data and mirrored, so conjugate
        symmetry survives exactly.
        """
        gr_poles, gr_res = [], []
        exact = {}
        for k, (p, B) in enumerate(zip(self.poles, self.residues)):
            if p.imag < 0 and p.conjugate() in self.poles:
                continue
            sp = GaussianRational.from_complex(p, digits)
            sB = [[GaussianRational.from_complex(x, digits) for x in row] for row in B]
            exact[k] = (sp, sB)
        for k, p in enumerate(self.poles):
            if k in exact:
                sp, sB = exact[k]
            else:
                j = self.poles.index(p.conjugate())
                sp0, sB0 = exact[j]
                sp, sB = sp0.conjugate(), [[x.conjugate() for x in row] for row in sB0]
            gr_poles.append(sp)
            gr_res.append(sB)
        n = self.size
        lin = [RationalFunction(Poly.const(1), Poly.linear_root(s)) for s in gr_poles]
        entries = []
        for r in range(n):
            row = []
            for c in range(n):
                acc = RationalFunction.const(0)
                for B, f in zip(gr_res, lin):
                    if B[r][c]:
                        acc = acc + f * B[r][c]
                row.append(acc)
            entries.append(row)
        return RatFuncMatrix(entries)

    def to_dict(self) -> dict:
        return {
            "poles": [[p.real, p.imag] for p in self.poles],
            "residues": [[[[x.real, x.imag] for x in row] for row in B] for B in self.residues],
        }


# --------------------------------------------------------------------------------------

def _complex_matrix(obj, what: str) -> np.ndarray:
    def entry(x):
        if isinstance(x, (int, float)):
            return complex(x)
        if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
            return complex(x[0], x[1])
        raise InputError(f"{what}: entries must be numbers or [re, im] pairs, got {x!r}")

    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise InputError(f"{what}: expected a list of rows")
    m = np.array([[entry(x) for x in row] for row in obj], dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{what}: matrix must be square")
    return m


@dataclass(frozen=True)
class TargetData:
    generators: tuple
    points: tuple
    base: float | None = None

    def __post_init__(self):
        gens = tuple(np.array(C, dtype=complex) for C in self.generators)
        pts = tuple(complex(p) for p in self.points)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "points", pts)
        if not gens or len(gens) != len(pts):
            raise InputError("need one generator per singular point")
        n = gens[0].shape[0]
        for C in gens:
            if C.shape != (n, n):
                raise InputError("generators must be square matrices of one size")
            if np.linalg.cond(C) > 1e12:
                raise InputError("generators must be invertible")
        for i, p in enumerate(pts):
            if p.imag <= 0:
                raise InputError(f"singular point {p} is not in the open upper half plane")
            if any(p == q for q in pts[i + 1:]):
                raise InputError(f"repeated singular point {p}")
        if len(pts) > MAX_POINTS or n > MAX_SIZE:
            raise InputError(f"supported scope is r <= {MAX_POINTS} points and n <= {MAX_SIZE}")
        if self.base is not None:
            b = complex(self.base)
            if b.imag != 0:
                raise InputError("base point must be real")
            object.__setattr__(self, "base", float(b.real))

    @property
    def size(self) -> int:
        return self.generators[0].shape[0]

    @classmethod
    def from_dict(cls, d) -> "TargetData":
        if not isinstance(d, dict):
            raise InputError("targets file must hold a JSON object")
        try:
            gens = [_complex_matrix(g, f"generator {k}") for k, g in enumerate(d["generators"])]
            pts = []
            for p in d["points"]:
                if isinstance(p, (int, float)):
                    pts.append(complex(p))
                elif isinstance(p, list) and len(p) == 2:
                    pts.append(complex(float(p[0]), float(p[1])))
                else:
                    raise InputError(f"malformed point {p!r}")
        except KeyError as exc:
            raise InputError(f"targets file is missing {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed targets file: {exc}") from exc
        base = d.get("base")
        if base is not None and not isinstance(base, (int, float)):
            raise InputError("base must be a real number")
        return cls(gens, pts, base)

    @classmethod
    def from_json(cls, text: str) -> "TargetData":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in targets file: {exc}") from exc

    def to_dict(self) -> dict:
        d = {
            "points": [[p.real, p.imag] for p in self.points],
            "generators": [[[[x.real, x.imag] for x in row] for row in C] for C in self.generators],
        }
        if self.base is not None:
            d["base"] = self.base
        return d


# --------------------------------------------------------------------------------------

def matrix_log(C: np.ndarray, cond_limit: float = 1e8):
    """Principal logarithm; returns (L, method).

    Diagonalizable input goes through the eigendecomposition; otherwise the
    inverse scaling-and-squaring algorithm is used. Eigenvalues on the negative
    real axis get argument +pi.
    """
    C = np.asarray(C, dtype=complex)
    w, V = np.linalg.eig(C)
    if np.any(np.abs(w) == 0):
        raise LogBranchFailure("singular matrix has no logarithm")
    scale = max(1.0, float(np.max(np.abs(w))))
    on_cut = (w.real < 0) & (np.abs(w.imag) <= 1e-12 * scale)
    if np.linalg.cond(V) < cond_limit:
        logs = np.where(on_cut, np.log(np.abs(w)) + 1j * math.pi, np.log(w))
        method = "eigendecomposition, principal branch"
        if np.any(on_cut):
            method += " (eigenvalue on negative axis, argument +pi)"
        return V @ np.diag(logs) @ np.linalg.inv(V), method
    if np.any(on_cut):
        raise LogBranchFailure("defective matrix with an eigenvalue on the branch cut")
    L = scipy.linalg.logm(C)
    return np.asarray(L, dtype=complex), "inverse scaling-and-squaring, principal branch"


def symmetrize_targets(t: TargetData):
    """Pole set S = (s_1..s_r, conj s_1..conj s_r) and the target representation.

    Loops: the standard loop alpha_k around s_k, and its mirror tau o alpha_k
    around conj(s_k); targets C_k and conj(C_k) respectively.
    """
    S = list(t.points) + [p.conjugate() for p in t.points]
    loops = standard_loops(S, t.base)
    r = len(t.points)
    upper = loops[:r]
    mirrored = [lp.mirrored() for lp in upper]
    targets = list(t.generators) + [C.conj() for C in t.generators]
    return S, MonodromyRep(upper[0].base, upper + mirrored, targets)


def residue_ansatz(S, targets: MonodromyRep) -> FuchsianSystem:
    """B = log(C) / (2 pi i) on the upper poles, conj(B) on their mirrors."""
    S = [complex(s) for s in S]
    r = len(S) // 2
    if len(S) != 2 * r or any(S[r + k] != S[k].conjugate() for k in range(r)):
        raise InputError("pole list must be (s_1..s_r, conj s_1..conj s_r)")
    residues, branches = [], []
    for k in range(r):
        L, method = matrix_log(targets.matrices[k])
        residues.append(L / TWO_PI_I)
        branches.append(method)
    residues += [B.conj() for B in residues]
    return FuchsianSystem(S, residues, {"branches": branches})


def _pack(system: FuchsianSystem, pairs) -> np.ndarray:
    up = np.concatenate([system.residues[k].ravel() for k, _ in pairs])
    return np.concatenate([up.real, up.imag])


def _unpack(x: np.ndarray, template: FuchsianSystem, pairs) -> FuchsianSystem:
    n = template.size
    half = len(x) // 2
    up = x[:half] + 1j * x[half:]
    residues = list(template.residues)
    for idx, (k, j) in enumerate(pairs):
        B = up[idx * n * n:(idx + 1) * n * n].reshape(n, n)
        residues[k] = B
        residues[j] = B.conj()
    return FuchsianSystem(template.poles, residues, dict(template.info))


def _residual(system: FuchsianSystem, targets: MonodromyRep, order, step_fraction, tol_mono,
              track_error=False) -> np.ndarray:
    rep = monodromy_rep(system, targets.loops, order, step_fraction, tol_mono, track_error=track_error)
    return np.concatenate([(m - t).ravel() for m, t in zip(rep.matrices, targets.matrices)])


def _sup(F: np.ndarray) -> float:
    return float(np.max(np.abs(F))) if F.size else 0.0


def refine(system: FuchsianSystem, targets: MonodromyRep, tol: float = 1e-10, max_iter: int = 25,
           order: int = DEFAULT_ORDER, step_fraction: float = DEFAULT_STEP_FRACTION,
           tol_mono: float = DEFAULT_TOL_MONO, jobs: int = 1, max_halvings: int = 50) -> FuchsianSystem:
    """Damped Gauss-Newton on the upper-half-plane residues.

    The residual is (computed monodromy - target) over every loop. Jacobian by
    forward differences with step 1e-6 * (1 + |x_j|) on the real and imaginary
    parts of the free residue entries. The returned system carries
    ``info['iterations']`` and ``info['residual']``.
    """
    pairs = system.conjugate_pairs()
    x = _pack(system, pairs)
    current = _unpack(x, system, pairs)

    def F(xv):
        return _residual(_unpack(xv, system, pairs), targets, order, step_fraction, tol_mono)

    Fx = F(x)
    history = [_sup(Fx)]
    it = 0
    while _sup(Fx) > tol:
        if it >= max_iter:
            raise NoConvergence(it, _sup(Fx))
        it += 1
        steps = 1e-6 * (1.0 + np.abs(x))

        def column(j):
            xp = x.copy()
            xp[j] += steps[j]
            return (F(xp) - Fx) / steps[j]

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                cols = list(pool.map(column, range(len(x))))
        else:
            cols = [column(j) for j in range(len(x))]
        Jc = np.stack(cols, axis=1)
        J = np.concatenate([Jc.real, Jc.imag])
        rhs = -np.concatenate([Fx.real, Fx.imag])
        delta = np.linalg.lstsq(J, rhs, rcond=None)[0]
        f0 = float(np.linalg.norm(Fx))
        alpha = 1.0
        for _ in range(max_halvings):
            xn = x + alpha * delta
            try:
                Fn = F(xn)
            except PVDescentError:
                Fn = None
            if Fn is not None and np.all(np.isfinite(Fn)) and np.linalg.norm(Fn) < f0:
                break
            alpha /= 2
        else:
            raise NoConvergence(it, _sup(Fx), "damped Gauss-Newton step failed to decrease the residual")
        x, Fx = xn, Fn
        history.append(_sup(Fx))
    current = _unpack(x, system, pairs)
    current.info.update({"iterations": it, "residual": _sup(Fx), "history": history})
    return current


# --------------------------------------------------------------------------------------

@dataclass
class Realization:
    system: FuchsianSystem
    exact_system: RatFuncMatrix
    real_system: RatFuncMatrix
    targets: MonodromyRep
    achieved: MonodromyRep
    report: dict

    def report_text(self, digits: int = 15) -> str:
        rp = self.report
        g = f".{digits}g"
        lines = [
            f"points: {len(self.targets) // 2} (pole set of size {len(self.targets)})",
            f"base point: {format(self.targets.base.real, g)}",
            f"Gauss-Newton iterations: {rp['iterations']}",
            "monodromy residuals (max |M - target| per loop):",
        ]
        for k, v in enumerate(rp["loop_residuals"]):
            lines.append(f"  loop {k}: {format(v, g)}")
        lines += [
            f"max monodromy residual: {format(rp['monodromy_residual'], g)}",
            f"rounded system monodromy residual: {format(rp['rounded_residual'], g)}",
            f"conjugation formula residual: {format(rp['conjugation_residual'], g)}",
            f"trace consistency residual: {format(rp['trace_residual'], g)}",
            f"real system has real coefficients: {'yes' if rp['real_coefficients'] else 'no'}",
        ]
        for k, b in enumerate(rp["branches"]):
            lines.append(f"log branch at point {k}: {b}")
        lines.append("descent:")
        lines.extend("  " + ln for ln in rp["descent"].to_text(digits).splitlines())
        return "\n".join(lines)


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, exc, tb):
        if isinstance(exc, PVDescentError) and not getattr(exc, "stage", None):
            exc.stage = self.name
            exc.args = (f"[{self.name}] {exc}",)
        return False


def _trace_residual(system: FuchsianSystem, targets: MonodromyRep) -> float:
    """Distance of tr(B_k) - log det(C_k) / (2 pi i) to the integers over the upper poles.

    The mirrored loops are negatively oriented, so the lower poles satisfy the
    conjugate relation automatically.
    """
    worst = 0.0
    r = len(system.poles) // 2
    for B, C in zip(system.residues[:r], targets.matrices[:r]):
        d = np.trace(B) - cmath.log(np.linalg.det(C)) / TWO_PI_I
        worst = max(worst, abs(d - round(d.real)))
    return float(worst)


def realize_and_descend(t: TargetData, tol: float = 1e-10, max_iter: int = 25,
                        order: int = DEFAULT_ORDER, step_fraction: float = DEFAULT_STEP_FRACTION,
                        tol_mono: float = DEFAULT_TOL_MONO, digits: int = 15, jobs: int = 1) -> Realization:
    """symmetrize -> ansatz -> refine -> descent report -> block-map descent."""
    with _Stage("symmetrize"):
        S, targets = symmetrize_targets(t)
    with _Stage("ansatz"):
        sys0 = residue_ansatz(S, targets)
    with _Stage("refine"):
        system = refine(sys0, targets, tol, max_iter, order, step_fraction, tol_mono, jobs)
    with _Stage("verify"):
        achieved = monodromy_rep(system, targets.loops, order, step_fraction, tol_mono, jobs=jobs)
        loop_res = [float(np.max(np.abs(m - c))) for m, c in zip(achieved.matrices, targets.matrices)]
        conj = check_conjugation_formula(system, standard_loops(S, t.base), order, step_fraction,
                                         tol_mono, jobs=jobs)
        exact = system.to_ratfunc(digits)
        rounded = monodromy_rep(exact, targets.loops, order, step_fraction, tol_mono, jobs=jobs)
        rounded_res = rounded.max_deviation(targets)
    with _Stage("descent"):
        drep = descent_report(exact, tol_mono, order, step_fraction)
        real = mu_descend(exact)
    report = {
        "iterations": system.info.get("iterations", 0),
        "loop_residuals": loop_res,
        "monodromy_residual": max(loop_res),
        "rounded_residual": rounded_res,
        "conjugation_residual": conj["max_deviation"],
        "trace_residual": _trace_residual(system, targets),
        "real_coefficients": real.is_real(),
        "branches": sys0.info.get("branches", []),
        "descent": drep,
    }
    return Realization(system, exact, real, targets, achieved, report)


def real_system_monodromy(real: Realization, order: int = DEFAULT_ORDER,
                          step_fraction: float = DEFAULT_STEP_FRACTION,
                          tol_mono: float = DEFAULT_TOL_MONO, jobs: int = 1) -> dict:
    """Monodromy of the descended 2n x 2n system on the target loops.

    Compared both with the block image mu(C) of each target and with
    kron(C, I_2). For a system with real coefficients the block map acts
    entrywise as x -> x * I_2, so the second comparison is the one that holds
    identically; the first holds only for real targets.
    """
    rep = monodromy_rep(real.real_system, real.targets.loops, order, step_fraction, tol_mono, jobs=jobs)
    block = [float(np.max(np.abs(m - mu_constant(np.asarray(c)))))
             for m, c in zip(rep.matrices, real.targets.matrices)]
    kron = [float(np.max(np.abs(m - np.kron(c, np.eye(2)))))
            for m, c in zip(rep.matrices, real.targets.matrices)]
    return {"rep": rep, "block_image_deviation": block, "kron_deviation": kron,
            "max_block_image_deviation": max(block), "max_kron_deviation": max(kron)}
