"""Command-line front end: ``pvdescent <command> ...``.

Every command writes a report whose first line is a ``#`` header carrying
the timestamp; everything after it depends only on the inputs and options.
Exit codes: 0 success, 1 bad input, 2 violated mathematical precondition,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import RatFuncMatrix, conjugate_matrix, format_matrix, parse_point, parse_system
from .algebra.gaussian import format_gr
from .descent import (Cocycle, block_series, check_equivalence, descent_report, find_constant_gauge,
                      gauge_transform, mu_descend)
from .errors import InputError, PVDescentError
from .monodromy import (DEFAULT_TOL_MONO, Loop, check_conjugation_formula, enclosing_loop, monodromy_rep,
                        product_around_all, standard_loops)
from .realizer import TargetData, real_system_monodromy, realize_and_descend
from .series import DEFAULT_ORDER, DEFAULT_STEP_FRACTION, defining_equation_residual, fundamental_series

DIGITS = 15


@dataclass(frozen=True)
class RunConfig:
    order: int = DEFAULT_ORDER
    step_fraction: float = DEFAULT_STEP_FRACTION
    tol_mono: float = DEFAULT_TOL_MONO
    tol_newton: float = 1e-10
    max_iter: int = 25
    mode: str = "float"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.order < 2 or self.max_iter < 1 or self.jobs < 1:
            raise InputError("order must be >= 2, max-iter and jobs >= 1")
        if not 0 < self.step_fraction < 1:
            raise InputError("step-fraction must lie in (0, 1)")
        if not (self.tol_mono > 0 and self.tol_newton > 0):
            raise InputError("tolerances must be positive")
        if self.mode not in ("exact", "float"):
            raise InputError("mode must be 'exact' or 'float'")
        if self.seed < 0:
            raise InputError("seed must be non-negative")


# --------------------------------------------------------------------------------------
# formatting

def fmt_real(x: float, digits: int = DIGITS) -> str:
    return format(float(x), f".{digits}g")


def fmt_complex(z, digits: int = DIGITS) -> str:
    z = complex(z)
    re, im = fmt_real(z.real, digits), fmt_real(abs(z.imag), digits)
    if z.imag == 0:
        return re
    sign = "-" if z.imag < 0 else "+"
    if z.real == 0:
        return f"{'-' if sign == '-' else ''}{im}*i"
    return f"({re}{sign}{im}*i)"


def fmt_numeric_matrix(m, digits: int = DIGITS, indent: str = "") -> str:
    rows = ["[" + ", ".join(fmt_complex(x, digits) for x in row) + "]" for row in np.asarray(m)]
    return indent + "[" + (",\n" + indent + " ").join(rows) + "]"


def fmt_exact_matrix(m) -> str:
    rows = ["[" + ", ".join(format_gr(x) for x in row) + "]" for row in m]
    return "[" + ",\n ".join(rows) + "]"


def _indent(text: str, pad: str = "  ") -> str:
    return "\n".join(pad + ln for ln in text.splitlines())


# --------------------------------------------------------------------------------------
# input

def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_matrix(path: str) -> RatFuncMatrix:
    """Matrix file in the system grammar; lines starting with '#' are ignored."""
    lines = [("" if ln.lstrip().startswith("#") else ln) for ln in _read(path).splitlines()]
    return parse_system("\n".join(lines))


def read_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from exc


def read_loops(path: str):
    data = read_json(path)
    if isinstance(data, dict):
        data = data.get("loops")
    if not isinstance(data, list) or not data:
        raise InputError(f"{path}: expected a non-empty list of loops")
    return [Loop.from_dict(d) for d in data]


def _parse_base(text):
    if text is None:
        return None
    b = complex(parse_point(text))
    if b.imag != 0:
        raise InputError("base point must be real")
    return b.real


# --------------------------------------------------------------------------------------
# commands; each returns the report body

def cmd_solve(args, cfg: RunConfig) -> str:
    A = read_matrix(args.matrix)
    center = parse_point(args.center)
    exact = cfg.mode == "exact"
    W = fundamental_series(A, center if exact else complex(center), cfg.order, exact=exact)
    out = [f"system: {format_matrix(A, multiline=False)}", f"center: {format_gr(center)}",
           f"order: {cfg.order}", f"mode: {cfg.mode}"]
    for k, Wk in enumerate(W.coeffs):
        body = fmt_exact_matrix(Wk) if exact else fmt_numeric_matrix(Wk)
        out.append(f"W_{k} =")
        out.append(_indent(body))
    if exact:
        bad = defining_equation_residual(A, W)
        out.append(f"defining equation residual: {'zero' if not bad else 'nonzero at ' + str(bad)}")
    return "\n".join(out)


def _loops_for(A: RatFuncMatrix, args):
    base = _parse_base(getattr(args, "base", None))
    if getattr(args, "loops", None):
        return read_loops(args.loops), False
    poles = list(A.poles())
    if not poles:
        raise InputError("system has no finite poles: nothing to loop around")
    return standard_loops(poles, base), True


def _write_json(path: str, payload) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=1) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _conjugation_lines(res: dict) -> list:
    out = ["conjugation check: conj(M_A(alpha)) vs M_{tau.A}(tau o alpha)"]
    for k, d in enumerate(res["deviations"]):
        out.append(f"  loop {k}: {fmt_real(d)}")
    out.append(f"conjugation residual: {fmt_real(res['max_deviation'])} "
               f"(tol {fmt_real(res['tol'], 3)}) {'pass' if res['passed'] else 'FAIL'}")
    return out


def cmd_monodromy(args, cfg: RunConfig) -> str:
    A = read_matrix(args.matrix)
    loops, auto = _loops_for(A, args)
    rep = monodromy_rep(A, loops, cfg.order, cfg.step_fraction, cfg.tol_mono, jobs=cfg.jobs)
    out = [f"system: {format_matrix(A, multiline=False)}", f"base point: {fmt_complex(rep.base)}",
           f"loops: {len(loops)}{' (standard)' if auto else ''}"]
    for k, (lp, m) in enumerate(zip(loops, rep.matrices)):
        around = f" around {fmt_complex(lp.pole)}" if lp.pole is not None else ""
        out.append(f"M_{k}{around} =")
        out.append(fmt_numeric_matrix(m, indent="  "))
    if auto:
        prod = product_around_all(rep)
        big = monodromy_rep(A, [enclosing_loop([lp.pole for lp in loops], rep.base)], cfg.order,
                            cfg.step_fraction, cfg.tol_mono).matrices[0]
        out.append("product around all poles =")
        out.append(fmt_numeric_matrix(prod, indent="  "))
        out.append(f"enclosing circle deviation: {fmt_real(np.max(np.abs(prod - big)))}")
    if args.check_conjugation:
        out.extend(_conjugation_lines(check_conjugation_formula(A, loops, cfg.order, cfg.step_fraction,
                                                                cfg.tol_mono, jobs=cfg.jobs)))
    if args.rep_out:
        _write_json(args.rep_out, rep.to_dict())
    return "\n".join(out)


def cmd_conjugate_check(args, cfg: RunConfig) -> str:
    A = read_matrix(args.matrix)
    loops, _ = _loops_for(A, args)
    res = check_conjugation_formula(A, loops, cfg.order, cfg.step_fraction, cfg.tol_mono, jobs=cfg.jobs)
    out = [f"system: {format_matrix(A, multiline=False)}",
           f"conjugate system: {format_matrix(conjugate_matrix(A), multiline=False)}"]
    out.extend(_conjugation_lines(res))
    return "\n".join(out)


def cmd_gauge(args, cfg: RunConfig) -> str:
    A = read_matrix(args.matrix)
    out = [f"system: {format_matrix(A, multiline=False)}"]
    if args.by:
        C = read_matrix(args.by)
        B = gauge_transform(A, C)
        out += [f"gauge: {format_matrix(C, multiline=False)}", "transformed system =", format_matrix(B),
                f"exact check: {'pass' if check_equivalence(A, B, C) else 'FAIL'}"]
        if args.system_out:
            _write_text(args.system_out, format_matrix(B))
        return "\n".join(out)
    B = read_matrix(args.to) if args.to else conjugate_matrix(A)
    out.append(f"target: {format_matrix(B, multiline=False)}")
    g = find_constant_gauge(A, B, seed=cfg.seed)
    if g is None:
        out.append("constant gauge: not found")
    else:
        out += ["constant gauge C =", format_matrix(g.C),
                f"exact check: {'pass' if check_equivalence(A, B, g.C) else 'FAIL'}"]
        if args.system_out:
            _write_text(args.system_out, format_matrix(g.C))
    return "\n".join(out)


def cmd_descend(args, cfg: RunConfig) -> str:
    A = read_matrix(args.matrix)
    chi = None
    if args.cocycle:
        chi = Cocycle.from_matrix(read_matrix(args.cocycle))
    R = mu_descend(A, chi)
    rep = descent_report(A, cfg.tol_mono, cfg.order, cfg.step_fraction, numeric=not args.no_numeric)
    out = [f"system: {format_matrix(A, multiline=False)}",
           f"cocycle: {'trivial' if chi is None or chi.is_trivial() else fmt_exact_matrix(chi.chi)}",
           "real system =", format_matrix(R), f"real coefficients: {'yes' if R.is_real() else 'no'}"]
    if args.series_check is not None:
        W = fundamental_series(A, parse_point(args.series_check), cfg.order, exact=True)
        bad = defining_equation_residual(R, block_series(W))
        out.append(f"block series check through order {cfg.order}: "
                   f"{'exact' if not bad else 'fails at ' + str(bad)}")
    out.append(rep.to_text(DIGITS))
    if args.system_out:
        _write_text(args.system_out, format_matrix(R))
    return "\n".join(out)


def _realize(args, cfg: RunConfig):
    t = TargetData.from_dict(read_json(args.targets))
    return realize_and_descend(t, cfg.tol_newton, cfg.max_iter, cfg.order, cfg.step_fraction,
                               cfg.tol_mono, digits=args.digits, jobs=cfg.jobs)


def _realization_outputs(real, args, out: list):
    out += [f"complex system (coefficients rounded to {args.digits} digits) =",
            format_matrix(real.exact_system), "real system =", format_matrix(real.real_system)]
    if args.system_out:
        _write_text(args.system_out, format_matrix(real.exact_system))
    if args.real_out:
        _write_text(args.real_out, format_matrix(real.real_system))


def cmd_realize(args, cfg: RunConfig) -> str:
    real = _realize(args, cfg)
    out = [real.report_text(DIGITS)]
    _realization_outputs(real, args, out)
    return "\n".join(out)


def cmd_pipeline(args, cfg: RunConfig) -> str:
    real = _realize(args, cfg)
    chk = real_system_monodromy(real, cfg.order, cfg.step_fraction, cfg.tol_mono, cfg.jobs)
    out = [real.report_text(DIGITS), "real system monodromy:"]
    for k, (b, kr) in enumerate(zip(chk["block_image_deviation"], chk["kron_deviation"])):
        out.append(f"  loop {k}: vs kron(C, I2) {fmt_real(kr)}, vs block image mu(C) {fmt_real(b)}")
    out.append(f"max deviation from kron(C, I2): {fmt_real(chk['max_kron_deviation'])}")
    out.append(f"max deviation from mu(C): {fmt_real(chk['max_block_image_deviation'])}")
    _realization_outputs(real, args, out)
    return "\n".join(out)


COMMANDS = {
    "solve": cmd_solve,
    "monodromy": cmd_monodromy,
    "conjugate-check": cmd_conjugate_check,
    "gauge": cmd_gauge,
    "descend": cmd_descend,
    "realize": cmd_realize,
    "pipeline": cmd_pipeline,
}


# --------------------------------------------------------------------------------------

class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--order", type=int, default=DEFAULT_ORDER, help="series truncation N (default 64)")
    g.add_argument("--step-fraction", type=float, default=DEFAULT_STEP_FRACTION,
                   help="continuation step as a fraction of the pole distance (default 0.5)")
    g.add_argument("--tol", type=float, default=None,
                   help="monodromy tolerance, or the Newton residual target for realize/pipeline")
    g.add_argument("--max-iter", type=int, default=25, help="Gauss-Newton iteration cap (default 25)")
    g.add_argument("--mode", choices=("exact", "float"), default="float",
                   help="coefficient arithmetic for series (default float)")
    g.add_argument("--jobs", type=int, default=1, help="worker threads for independent continuations")
    g.add_argument("--seed", type=int, default=0, help="seed for randomized gauge search")
    g.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")

    p = _ArgParser(prog="pvdescent", description="Monodromy, Galois descent and realization for "
                                                 "Fuchsian systems dW/dz = A(z) W over Q(i)(z).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    s = sub.add_parser("solve", parents=[common], help="power series fundamental matrix at a point")
    s.add_argument("matrix")
    s.add_argument("--center", default="0", help="expansion point, e.g. 1/2+i (default 0)")

    for name, helptext in (("monodromy", "monodromy matrices along loops"),
                           ("conjugate-check", "compare M_{tau.A}(tau o alpha) with conj M_A(alpha)")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("matrix")
        how = s.add_mutually_exclusive_group()
        how.add_argument("--auto", action="store_true", help="standard loops around every pole (default)")
        how.add_argument("--loops", help="JSON loop file")
        s.add_argument("--base", help="real base point for --auto")
        if name == "monodromy":
            s.add_argument("--check-conjugation", action="store_true")
            s.add_argument("--rep-out", help="write the representation as JSON")

    s = sub.add_parser("gauge", parents=[common], help="apply a gauge or search for a constant one")
    s.add_argument("matrix")
    how = s.add_mutually_exclusive_group()
    how.add_argument("--by", help="gauge matrix file: print C^-1 A C - C^-1 C'")
    how.add_argument("--to", help="target system file: search a constant C (default target tau.A)")
    s.add_argument("--system-out", help="write the resulting matrix")

    s = sub.add_parser("descend", parents=[common], help="block-map descent to a real 2n x 2n system")
    s.add_argument("matrix")
    s.add_argument("--cocycle", help="constant matrix chi with chi conj(chi) = I")
    s.add_argument("--series-check", metavar="POINT",
                   help="verify the block-mapped exact series at a real POINT solves the real system")
    s.add_argument("--no-numeric", action="store_true", help="skip the monodromy cross-check")
    s.add_argument("--system-out", help="write the real system")

    for name, helptext in (("realize", "Fuchsian system with prescribed monodromy, then descend"),
                           ("pipeline", "realize, descend and re-check the real system's monodromy")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("targets", help="JSON target file")
        s.add_argument("--digits", type=int, default=15,
                       help="significant digits when rationalizing coefficients (default 15)")
        s.add_argument("--system-out", help="write the complex system")
        s.add_argument("--real-out", help="write the real system")
    return p


def config_from_args(args) -> RunConfig:
    newton = args.command in ("realize", "pipeline")
    tol = args.tol
    return RunConfig(order=args.order, step_fraction=args.step_fraction,
                     tol_mono=tol if (tol is not None and not newton) else DEFAULT_TOL_MONO,
                     tol_newton=tol if (tol is not None and newton) else 1e-10,
                     max_iter=args.max_iter, mode=args.mode, seed=args.seed, jobs=args.jobs)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help/--version
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        body = COMMANDS[args.command](args, cfg)
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        text = f"# pvdescent {__version__} {args.command} {stamp}\n{body}\n"
        if args.output:
            try:
                Path(args.output).write_text(text)
            except OSError as exc:
                raise InputError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
        else:
            sys.stdout.write(text)
    except PVDescentError as exc:
        print(f"pvdescent: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
