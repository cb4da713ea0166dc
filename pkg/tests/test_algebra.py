import cmath

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import gaussians, matrices, poly_to_sympy, polys, ratfuncs, rf_to_sympy, sympy_equal
from pvdescent.algebra import (ComplexApprox, GaussianRational, Poly, RatFuncMatrix, RationalFunction,
                               conjugate_matrix, derivative, eval_at, format_matrix, format_ratfunc,
                               parse_expr, parse_point, parse_system, poly_gcd)
from pvdescent.algebra.gaussian import I, ONE, ZERO, format_gr
from pvdescent.errors import InputError, ParseError, PoleEvaluation

# --- Gaussian rationals ----------------------------------------------------------------


@given(gaussians(), gaussians(), gaussians())
def test_gaussian_field_axioms(a, b, c):
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + ZERO == a and a * ONE == a and a - a == ZERO
    if a:
        assert a * a.inverse() == ONE


@given(gaussians(), gaussians())
def test_gaussian_matches_python_complex(a, b):
    assert complex(a * b) == pytest.approx(complex(a) * complex(b), abs=1e-12)
    if b:
        assert complex(a / b) == pytest.approx(complex(a) / complex(b), abs=1e-9)


@given(gaussians())
def test_gaussian_conjugation_involution_and_canonical_form(a):
    assert a.conjugate().conjugate() == a
    assert (a * a.conjugate()).is_real()
    assert a.re.denominator > 0 and a.im.denominator > 0


def test_gaussian_canonical_text():
    assert format_gr(I) == "i"
    assert format_gr(-I) == "-i"
    assert format_gr(GaussianRational(1, 1)) == "(1+i)"
    assert format_gr(GaussianRational(sympy.Rational(1, 2), -3)) == "(1/2-3*i)"
    assert GaussianRational(2, 0) == GaussianRational(sympy.Rational(4, 2), 0)


def test_from_complex_rounds_to_digits():
    g = GaussianRational.from_complex(0.1 + 0.25j, 15)
    assert g == GaussianRational(sympy.Rational(1, 10), sympy.Rational(1, 4))


# --- polynomials and gcd ------------------------------------------------------------------


@given(polys(), polys())
def test_poly_gcd_divides_and_matches_sympy_degree(p, q):
    assume(p or q)
    g = poly_gcd(p, q)
    for f in (p, q):
        if f:
            assert not f.divmod(g)[1]
    ref = sympy.gcd(poly_to_sympy(p), poly_to_sympy(q), extension=sympy.I)
    assert g.degree == sympy.Poly(ref, sympy.Symbol("z")).degree()


@given(polys(), gaussians())
def test_taylor_shift_is_substitution(p, c):
    shifted = p.taylor_shift(c)
    t = sympy.Symbol("z")
    from conftest import gr_to_sympy

    ref = sympy.expand(poly_to_sympy(p).subs(t, t + gr_to_sympy(c)))
    assert sympy.expand(poly_to_sympy(shifted) - ref) == 0


# --- rational functions --------------------------------------------------------------------


@given(ratfuncs(), ratfuncs(), ratfuncs())
def test_ratfunc_field_axioms(f, g, h):
    assert f + g == g + f and f * g == g * f
    assert (f + g) + h == f + (g + h)
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    if f:
        assert f * f.inverse() == RationalFunction.const(1)


@given(ratfuncs(), ratfuncs())
def test_ratfunc_arithmetic_against_sympy(f, g):
    F, G = rf_to_sympy(f), rf_to_sympy(g)
    assert sympy_equal(rf_to_sympy(f + g), F + G)
    assert sympy_equal(rf_to_sympy(f * g), F * G)
    assert sympy_equal(rf_to_sympy(f - g), F - G)
    if g:
        assert sympy_equal(rf_to_sympy(f / g), F / G)


@given(ratfuncs())
def test_ratfunc_normal_form(f):
    assert f.den.lc() == ONE
    assert poly_gcd(f.num, f.den).is_const()


@given(ratfuncs())
def test_derivative_against_sympy(f):
    assert sympy_equal(rf_to_sympy(f.derivative()), sympy.diff(rf_to_sympy(f), sympy.Symbol("z")))


@given(ratfuncs(), ratfuncs())
def test_leibniz_rule(f, g):
    assert (f * g).derivative() == f.derivative() * g + f * g.derivative()


@given(ratfuncs(), ratfuncs())
def test_conjugation_is_a_field_automorphism(f, g):
    assert f.conjugate().conjugate() == f
    assert (f * g).conjugate() == f.conjugate() * g.conjugate()
    assert (f + g).conjugate() == f.conjugate() + g.conjugate()
    assert f.derivative().conjugate() == f.conjugate().derivative()


@given(ratfuncs())
def test_real_imag_split(f):
    a, b = f.real_imag()
    assert a.is_real() and b.is_real()
    assert a + b * RationalFunction.const(I) == f


# --- matrices -------------------------------------------------------------------------------


@given(matrices())
def test_conjugate_matrix_is_involution(A):
    assert conjugate_matrix(conjugate_matrix(A)) == A


@given(matrices(n=2), matrices(n=2))
def test_matrix_derivative_leibniz(A, B):
    assert derivative(A @ B) == derivative(A) @ B + A @ derivative(B)


@given(matrices(n=2))
def test_matrix_inverse(A):
    assume(A.det())
    n = A.rows
    assert A @ A.inverse() == RatFuncMatrix.identity(n)


def test_conjugate_matrix_examples():
    assert conjugate_matrix(parse_system("[[1]]")) == parse_system("[[1]]")
    assert conjugate_matrix(parse_system("[[i]]")) == parse_system("[[-i]]")
    assert conjugate_matrix(parse_system("[[z/(z-i)]]")) == parse_system("[[z/(z+i)]]")


def test_derivative_examples():
    assert derivative(parse_system("[[z^2]]")) == parse_system("[[2*z]]")
    assert derivative(parse_system("[[1/z]]")) == parse_system("[[-1/z^2]]")
    assert derivative(parse_system("[[z/(z-1)]]")) == parse_system("[[-1/(z-1)^2]]")


def test_matrix_poles():
    A = parse_system("[[1/(z^2+1), 1/(z-2)]]")
    assert sorted(A.poles(), key=lambda p: (round(p.real, 9), round(p.imag, 9))) == pytest.approx([-1j, 1j, 2])


# --- parser / printer -----------------------------------------------------------------------


def test_parse_examples():
    one = parse_system("[[1]]")
    assert one.shape == (1, 1) and one[0, 0] == RationalFunction.const(1)
    assert parse_system("[[i]]")[0, 0] == RationalFunction.const(I)
    M = parse_system("[[1,-1],[1,1]]")
    assert M.constant_values() == [[ONE, -ONE], [ONE, ONE]]


def test_parse_grammar_features():
    f = parse_expr(" 3/6 * z ^ 2 - (1 + i) / (z - 1/2) ")
    Z = RationalFunction.z()
    assert f == Z * Z * GaussianRational(sympy.Rational(1, 2)) - RationalFunction.const(GaussianRational(1, 1)) / (
        Z - RationalFunction.const(GaussianRational(sympy.Rational(1, 2))))
    assert parse_expr("z^-2") == parse_expr("1/z^2") == parse_expr("z^(-2)")
    assert parse_expr("--z") == parse_expr("z")


@pytest.mark.parametrize("text, line, column", [
    ("[[1,]]", 1, 5),
    ("[[1],[1,2]]", 1, 6),
    ("[[1]]\n  [[", 2, 3),
    ("[[x]]", 1, 3),
    ("[[1/0]]", 1, 4),
])
def test_parse_errors_report_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_system(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_parse_point():
    assert parse_point("1/2 - 3*i") == GaussianRational(sympy.Rational(1, 2), -3)
    with pytest.raises(InputError):
        parse_point("z + 1")


@given(matrices(max_degree=2))
def test_parse_print_round_trip(A):
    text = format_matrix(A)
    assert parse_system(text) == A
    assert format_matrix(parse_system(text)) == text


@given(ratfuncs(max_degree=3))
def test_expression_round_trip(f):
    assert parse_expr(format_ratfunc(f)) == f


# --- numeric evaluation -----------------------------------------------------------------------


def test_eval_at_examples():
    assert eval_at(parse_expr("z"), 2).value == 2
    assert eval_at(parse_expr("1/(z-i)"), 0).value == pytest.approx(1j)
    with pytest.raises(PoleEvaluation):
        eval_at(parse_expr("1/(z-i)"), 1j)


@given(ratfuncs(), gaussians())
def test_eval_matches_exact_evaluation(f, z0):
    try:
        exact = f(z0)
    except PoleEvaluation:
        return
    approx = eval_at(f, ComplexApprox.of(complex(z0), track=True), track=True)
    assert abs(approx.value - complex(exact)) <= approx.err + 1e-12 * (1 + abs(complex(exact)))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_error_radius_monotone(a, b, c, d):
    x = ComplexApprox.of(complex(a, b), track=True)
    y = ComplexApprox.of(complex(c, d), track=True)
    for r in (x + y, x - y, x * y):
        assert r.err >= max(x.err, y.err) >= 0


def test_exact_pole_evaluation():
    with pytest.raises(PoleEvaluation):
        parse_expr("1/(z-i)")(I)
    assert cmath.isclose(complex(parse_expr("1/(z-i)")(ZERO)), 1j)
