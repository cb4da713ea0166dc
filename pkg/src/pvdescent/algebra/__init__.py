"""Exact arithmetic over Q(i) and Q(i)(z), plus the system text format."""

from .approx import ComplexApprox, eval_at
from .gaussian import GR, I, ONE, ZERO, GaussianRational, as_gr
from .matrix import RatFuncMatrix, conjugate_matrix, derivative
from .parser import parse_expr, parse_point, parse_system
from .poly import Poly, poly_gcd
from .printer import format_matrix, format_poly, format_ratfunc
from .ratfunc import RationalFunction

__all__ = [
    "ComplexApprox", "eval_at", "GR", "I", "ONE", "ZERO", "GaussianRational", "as_gr",
    "RatFuncMatrix", "conjugate_matrix", "derivative", "parse_expr", "parse_point",
    "parse_system", "Poly", "poly_gcd", "format_matrix", "format_poly", "format_ratfunc",
    "RationalFunction",
]
