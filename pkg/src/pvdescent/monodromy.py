"""Analytic continuation along polygonal loops and monodromy representations.

Conventions
-----------
A fundamental matrix Y normalized to the identity at the base point is carried
along a loop; the matrix it arrives with is the monodromy M(loop), so that the
continued germ is Y * M(loop). Because continuation commutes with right
multiplication by constants, traversing loop p first and loop q second gives

    M(p then q) = M(q) @ M(p).

The loop traversed first is the rightmost factor. ``compose`` implements this
and the composition tests pin it down.
"""

from __future__ import annotations

import cmath
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cmp_to_key

import numpy as np

from .errors import DegenerateGeometry, InputError, OutOfDisk, PoleEvaluation, PrecisionLoss
from .series import DEFAULT_ORDER, DEFAULT_STEP_FRACTION, _tail_estimate, as_numeric

__all__ = [
    "DEFAULT_TOL_MONO",
    "Loop",
    "MonodromyRep",
    "winding_number",
    "default_base",
    "default_clearance",
    "standard_loops",
    "continue_along",
    "monodromy_rep",
    "check_conjugation_formula",
    "conjugate_system",
    "compose",
    "product_around_all",
    "enclosing_loop",
]

DEFAULT_TOL_MONO = 1e-8
_MAX_STEPS = 200_000
_MAX_HALVINGS = 40


def _c(p) -> complex:
    return complex(p)


@dataclass(frozen=True)
class Loop:
    """Closed polygon ``vertices[0] == vertices[-1] == base``.

    ``pole`` records the singular point a standard loop was built around (or None).
    """

    base: complex
    vertices: tuple
    pole: complex | None = None

    def __post_init__(self):
        verts = tuple(_c(v) for v in self.vertices)
        object.__setattr__(self, "base", _c(self.base))
        object.__setattr__(self, "vertices", verts)
        if self.pole is not None:
            object.__setattr__(self, "pole", _c(self.pole))
        if len(verts) < 2 or verts[0] != self.base or verts[-1] != self.base:
            raise InputError("a loop must start and end at its base point")

    def segments(self):
        return list(zip(self.vertices[:-1], self.vertices[1:]))

    def reversed(self) -> "Loop":
        return Loop(self.base, self.vertices[::-1], self.pole)

    def mirrored(self) -> "Loop":
        """Vertexwise complex conjugate: the loop tau o alpha (orientation not flipped)."""
        pole = None if self.pole is None else self.pole.conjugate()
        return Loop(self.base.conjugate(), tuple(v.conjugate() for v in self.vertices), pole)

    def refined(self) -> "Loop":
        """Insert the midpoint of every edge (same path, finer polygon)."""
        out = [self.vertices[0]]
        for a, b in self.segments():
            out.extend([(a + b) / 2, b])
        return Loop(self.base, tuple(out), self.pole)

    def then(self, other: "Loop") -> "Loop":
        """Concatenation: traverse ``self`` first, then ``other``."""
        if other.base != self.base:
            raise InputError("loops must share a base point to be concatenated")
        return Loop(self.base, self.vertices + other.vertices[1:], None)

    def clearance(self, points) -> float:
        """Smallest distance from the polygon to any of ``points``."""
        best = math.inf
        for p in points:
            for a, b in self.segments():
                best = min(best, _point_segment_distance(complex(p), a, b))
        return best

    def to_dict(self) -> dict:
        d = {"base": [self.base.real, self.base.imag],
             "vertices": [[v.real, v.imag] for v in self.vertices]}
        if self.pole is not None:
            d["pole"] = [self.pole.real, self.pole.imag]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Loop":
        try:
            base = complex(*d["base"])
            verts = tuple(complex(*v) for v in d["vertices"])
            pole = complex(*d["pole"]) if d.get("pole") is not None else None
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed loop record: {exc}") from exc
        return cls(base, verts, pole)


def _point_segment_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    u = ((p - a) * d.conjugate()).real / abs(d) ** 2
    u = min(1.0, max(0.0, u))
    return abs(p - (a + u * d))


def winding_number(loop: Loop, point) -> int:
    """Winding number of the polygon around ``point`` (crossing count)."""
    p = complex(point)
    w = 0
    for a, b in loop.segments():
        cross = ((b - a).conjugate() * (p - a)).imag
        if a.imag <= p.imag < b.imag and cross > 0:
            w += 1
        elif b.imag <= p.imag < a.imag and cross < 0:
            w -= 1
    return w


# --------------------------------------------------------------------------------------
# loop generation

def _diameter(points) -> float:
    pts = [complex(p) for p in points]
    if len(pts) < 2:
        return 0.0
    return max(abs(p - q) for p in pts for q in pts)


def default_base(poles) -> float:
    """Real base point left of every pole: min(Re S) - 1 - diam(S)."""
    poles = [complex(p) for p in poles]
    if not poles:
        return 0.0
    return min(p.real for p in poles) - 1.0 - _diameter(poles)


def default_clearance(poles, base) -> float:
    scale = _diameter(list(poles) + [base])
    return 1e-3 * (scale if scale > 0 else 1.0)


def _detour_path(a: complex, e: complex, obstacles):
    """Polyline from a to e that skirts every disk (t, R) it would cross.

    A disk whose center lies left of the segment is passed on the right and
    vice versa (on the line: passed on the left), so the path never crosses
    the straight approach to another pole.
    """
    d = e - a
    length = abs(d)
    crossings = []
    for t, R in obstacles:
        if _point_segment_distance(t, a, e) >= R:
            continue
        # |a + u d - t| = R  ->  u^2 |d|^2 + 2u Re(conj(d)(a-t)) + |a-t|^2 - R^2 = 0
        w = a - t
        B = (d.conjugate() * w).real
        disc = B * B - length ** 2 * (abs(w) ** 2 - R * R)
        root = math.sqrt(max(disc, 0.0))
        u1 = (-B - root) / length ** 2
        u2 = (-B + root) / length ** 2
        crossings.append((u1, u2, t, R))
    crossings.sort(key=lambda c: c[0])
    path = [a]
    for u1, u2, t, R in crossings:
        p_in, p_out = a + u1 * d, a + u2 * d
        th_in, th_out = cmath.phase(p_in - t), cmath.phase(p_out - t)
        if (d.conjugate() * (t - a)).imag > 0:
            sweep = -((th_out - th_in) % (2 * math.pi))  # counterclockwise: t stays on the left
        else:
            sweep = (th_in - th_out) % (2 * math.pi)  # clockwise: t stays on the right
        m = max(2, math.ceil(abs(sweep) / (math.pi / 4)))
        path.append(p_in)
        for k in range(1, m):
            path.append(t + R * cmath.exp(1j * (th_in - sweep * k / m)))
        path.append(p_out)
    path.append(e)
    return path


def _keyhole(pole: complex, base: complex, rho: float, obstacles, sides: int) -> Loop:
    u = (pole - base) / abs(pole - base)
    entry = pole - rho * u
    out = _detour_path(base, entry, obstacles)
    theta0 = cmath.phase(-u)
    ring = [pole + rho * cmath.exp(1j * (theta0 + 2 * math.pi * k / sides)) for k in range(1, sides)]
    verts = out + ring + [entry] + out[-2::-1]
    return Loop(base, tuple(verts), pole)


def standard_loops(poles, base=None, clearance: float | None = None, sides: int = 4):
    """One positively oriented loop per finite pole, each winding once around it only.

    Loops are keyholes: a path from the base to a small polygon around the pole,
    once around counterclockwise, and back along the same path. The loop for
    conj(s) is the reversed mirror image of the loop for s, so that
    ``loop(s).mirrored()`` is the (negatively oriented) loop tau o alpha.
    """
    poles = [complex(p) for p in poles]
    if base is None:
        base = default_base(poles)
    base = complex(base)
    if abs(base.imag) > 0:
        raise InputError(f"base point must be real, got {base}")
    if clearance is None:
        clearance = default_clearance(poles, base)
    for i, p in enumerate(poles):
        if abs(p - base) < 4 * clearance:
            raise DegenerateGeometry(f"pole {p} too close to base point {base}")
        for q in poles[i + 1:]:
            if abs(p - q) < 4 * clearance:
                raise DegenerateGeometry(f"poles {p} and {q} closer than 4 x clearance {clearance:.3g}")

    rho = {}
    for p in poles:
        others = [abs(p - q) for q in poles if q != p]
        rho[p] = min(min(others, default=math.inf), abs(p - base)) / 5.0

    built = {}
    for p in poles:
        if p.imag < 0 and p.conjugate() in poles:
            continue
        obstacles = [(q, 2 * rho[q]) for q in poles if q != p]
        built[p] = _keyhole(p, base, rho[p], obstacles, sides)
    loops = []
    for p in poles:
        if p in built:
            loops.append(built[p])
        else:
            loops.append(built[p.conjugate()].mirrored().reversed())
    for lp, p in zip(loops, poles):
        if winding_number(lp, p) != 1 or any(winding_number(lp, q) != 0 for q in poles if q != p):
            raise DegenerateGeometry(f"could not build an admissible loop around {p}")
        if lp.clearance([q for q in poles if q != p]) < clearance:
            raise DegenerateGeometry(f"loop around {p} passes within clearance of another pole")
    return loops


# --------------------------------------------------------------------------------------
# continuation

def _transition(system, center: complex, h: complex, order: int):
    """Phi = sum_k W_k h^k for the fundamental series normalized to I at ``center``.

    Uses scaled coefficients A_j h^(j+1) so that V_k = W_k h^k directly.
    Returns (Phi, tail_estimate, sum_of_term_norms).
    """
    Acoef = system.taylor(center, order)
    scale = h ** np.arange(1, order + 1)
    At = Acoef * scale[:, None, None]
    n = Acoef.shape[1]
    V = np.zeros((order, n, n), dtype=complex)
    V[0] = np.eye(n)
    for i in range(1, order):
        V[i] = np.matmul(At[:i], V[i - 1 :: -1][:i]).sum(axis=0) / i
    norms = np.abs(V).sum(axis=(1, 2))
    return V.sum(axis=0), _tail_estimate(norms), float(norms.sum())


def continue_along(A, loop: Loop, order: int = DEFAULT_ORDER,
                   step_fraction: float = DEFAULT_STEP_FRACTION,
                   tol_mono: float = DEFAULT_TOL_MONO, track_error: bool = True,
                   clearance: float | None = None, return_error: bool = False):
    """Monodromy matrix of the base-normalized fundamental solution along ``loop``.

    Every step stays within ``step_fraction`` of the distance to the nearest pole.
    With ``track_error`` the accumulated error estimate (relative to the size of
    the result) is checked against ``tol_mono`` and :class:`PrecisionLoss` is
    raised when exceeded.
    """
    if not 0 < step_fraction < 1:
        raise InputError("step_fraction must lie in (0, 1)")
    system = as_numeric(A)
    poles = np.asarray(system.poles, dtype=complex)
    if clearance is None:
        clearance = default_clearance(list(poles), loop.base)
    if len(poles) and loop.clearance(poles) < clearance:
        raise OutOfDisk(f"loop passes within {clearance:.3g} of a pole")
    n = system.size
    Y = np.eye(n, dtype=complex)
    history = []  # (Y_before, Y_after, local error) per step, for error propagation
    steps = 0
    for a, b in loop.segments():
        z = a
        while True:
            remaining = b - z
            dist = abs(remaining)
            if dist <= 1e-15 * max(1.0, abs(b)):
                break
            r = float(np.min(np.abs(poles - z))) if len(poles) else math.inf
            if r < 1e-12:
                raise OutOfDisk(f"continuation reached a pole near {z}")
            h_len = min(dist, step_fraction * r)
            h = remaining / dist * h_len
            for _ in range(_MAX_HALVINGS):
                try:
                    Phi, tail, total = _transition(system, z, h, order)
                except PoleEvaluation as exc:
                    raise OutOfDisk(str(exc)) from exc
                if np.isfinite(total) and tail <= 1e-16 * max(1.0, total):
                    break
                h = h / 2
            else:
                raise OutOfDisk(f"series did not converge near {z}")
            Y_new = Phi @ Y
            if track_error:
                err = tail + 8 * order * np.finfo(float).eps * total
                history.append((Y_new, err * np.linalg.norm(Y, 2)))
            Y = Y_new
            z = z + h if abs(b - (z + h)) > 1e-15 * max(1.0, abs(b)) else b
            steps += 1
            if steps > _MAX_STEPS:
                raise OutOfDisk("step budget exhausted")
    err_total = 0.0
    if track_error:
        # propagate each local error to the end with the actual transition Y_end Y_k^-1
        for Yk, e in history:
            amp = np.linalg.norm(Y @ np.linalg.inv(Yk), 2)
            err_total += amp * e
        rel = err_total / max(1.0, float(np.linalg.norm(Y, 2)))
        if rel > tol_mono:
            raise PrecisionLoss(f"estimated continuation error {rel:.3e} exceeds {tol_mono:.1e}")
    if return_error:
        return Y, err_total
    return Y


# --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class MonodromyRep:
    base: complex
    loops: tuple
    matrices: tuple = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "base", complex(self.base))
        object.__setattr__(self, "loops", tuple(self.loops))
        mats = tuple(np.asarray(m, dtype=complex) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        if len(self.loops) != len(mats):
            raise InputError("one matrix per loop is required")
        for m in mats:
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise InputError("monodromy matrices must be square")
            if abs(np.linalg.det(m)) < 1e-300 or np.linalg.cond(m) > 1e14:
                raise InputError("monodromy matrices must be invertible")

    def __len__(self):
        return len(self.loops)

    def max_deviation(self, other: "MonodromyRep") -> float:
        return max((float(np.max(np.abs(a - b))) for a, b in zip(self.matrices, other.matrices)),
                   default=0.0)

    def to_dict(self) -> dict:
        return {
            "base": [self.base.real, self.base.imag],
            "loops": [lp.to_dict() for lp in self.loops],
            "matrices": [[[[x.real, x.imag] for x in row] for row in m] for m in self.matrices],
        }

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "MonodromyRep":
        try:
            base = complex(*d["base"])
            loops = [Loop.from_dict(x) for x in d["loops"]]
            mats = [np.array([[complex(*x) for x in row] for row in m]) for m in d["matrices"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed monodromy record: {exc}") from exc
        return cls(base, loops, mats)

    @classmethod
    def from_json(cls, text: str) -> "MonodromyRep":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc


def monodromy_rep(A, loops, order: int = DEFAULT_ORDER, step_fraction: float = DEFAULT_STEP_FRACTION,
                  tol_mono: float = DEFAULT_TOL_MONO, track_error: bool = True,
                  jobs: int = 1) -> MonodromyRep:
    loops = list(loops)
    if not loops:
        raise InputError("at least one loop is required")
    base = loops[0].base
    if any(lp.base != base for lp in loops):
        raise InputError("all loops must share one base point")
    system = as_numeric(A)

    def one(lp):
        return continue_along(system, lp, order, step_fraction, tol_mono, track_error)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            mats = list(pool.map(one, loops))
    else:
        mats = [one(lp) for lp in loops]
    return MonodromyRep(base, loops, mats)


def conjugate_system(A):
    """tau.A: conjugate all coefficients."""
    if hasattr(A, "conjugate"):
        return A.conjugate()
    raise TypeError(f"cannot conjugate {type(A).__name__}")


def check_conjugation_formula(A, loops, order: int = DEFAULT_ORDER,
                              step_fraction: float = DEFAULT_STEP_FRACTION,
                              tol_mono: float = DEFAULT_TOL_MONO, jobs: int = 1) -> dict:
    """Compare M_{tau.A}(tau o alpha) with conj(M_A(alpha)) for every loop alpha.

    Both sides come from separate continuations: A along alpha, and tau.A along
    the mirrored polygon.
    """
    loops = list(loops)
    system = as_numeric(A)
    poles = np.asarray(system.poles, dtype=complex)
    for p in poles:
        if np.min(np.abs(poles - p.conjugate())) > 1e-9 * max(1.0, abs(p)):
            raise InputError("pole set is not closed under complex conjugation")
    if loops and abs(loops[0].base.imag) > 0:
        raise InputError("base point must be real")
    conj_sys = as_numeric(conjugate_system(A))
    rep = monodromy_rep(system, loops, order, step_fraction, tol_mono, jobs=jobs)
    rep_c = monodromy_rep(conj_sys, [lp.mirrored() for lp in loops], order, step_fraction, tol_mono,
                          jobs=jobs)
    devs = [float(np.max(np.abs(mc - m.conj()))) for m, mc in zip(rep.matrices, rep_c.matrices)]
    worst = max(devs, default=0.0)
    return {
        "loops": len(loops),
        "deviations": devs,
        "max_deviation": worst,
        "tol": tol_mono,
        "passed": worst < tol_mono,
        "rep": rep,
        "conjugate_rep": rep_c,
    }


def compose(*matrices) -> np.ndarray:
    """Monodromy of the concatenation of loops given in traversal order."""
    out = np.eye(matrices[0].shape[0], dtype=complex)
    for m in matrices:
        out = m @ out
    return out


def _polyline_steps(vertices):
    steps = []
    for a, b in zip(vertices[:-1], vertices[1:]):
        if abs(b - a) > 0:
            steps.append(((b - a) / abs(b - a), abs(b - a)))
    return steps


def _departure_cmp(va, vb) -> int:
    """Cyclic order of two paths leaving the same base point: -1 if ``va`` is clockwise of ``vb``.

    Walks both polylines until they separate and compares directions there.
    """
    sa, sb = _polyline_steps(va), _polyline_steps(vb)
    i = j = 0
    ra, rb = sa[0][1], sb[0][1]
    tol = 1e-12 * max(1.0, abs(va[0]))
    while i < len(sa) and j < len(sb):
        turn = cmath.phase(sb[j][0] / sa[i][0])
        if abs(turn) > 1e-10:
            return -1 if turn > 0 else 1
        step = min(ra, rb)
        ra, rb = ra - step, rb - step
        if ra <= tol:
            i += 1
            ra = sa[i][1] if i < len(sa) else 0.0
        if rb <= tol:
            j += 1
            rb = sb[j][1] if j < len(sb) else 0.0
    return 0


def product_around_all(rep: MonodromyRep) -> np.ndarray:
    """Monodromy of the big counterclockwise loop around every finite pole.

    The keyhole loops leave the base point without crossing each other, so
    traversing them in clockwise-to-counterclockwise order of departure gives
    a loop homotopic to a large positively oriented circle (for a base point
    outside the convex hull of the poles), i.e. the inverse of the monodromy
    around infinity.
    """
    order = sorted(range(len(rep)),
                   key=cmp_to_key(lambda p, q: _departure_cmp(rep.loops[p].vertices, rep.loops[q].vertices)))
    return compose(*(rep.matrices[k] for k in order))


def enclosing_loop(poles, base=None, sides: int = 64) -> Loop:
    """Counterclockwise polygon through the base point around every pole.

    Centered at the centroid of the poles; its monodromy should agree with
    :func:`product_around_all` on the standard loops.
    """
    poles = [complex(p) for p in poles]
    if not poles:
        raise InputError("no finite poles to enclose")
    base = complex(default_base(poles) if base is None else base)
    c = sum(poles) / len(poles)
    R = abs(base - c)
    t0 = cmath.phase(base - c)
    ring = [c + R * cmath.exp(1j * (t0 + 2 * math.pi * k / sides)) for k in range(1, sides)]
    lp = Loop(base, (base, *ring, base))
    if lp.clearance(poles) < default_clearance(poles, base) or any(
            winding_number(lp, p) != 1 for p in poles):
        raise DegenerateGeometry("base point too close to the poles for an enclosing circle")
    return lp
