from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pvdescent.algebra import GaussianRational, Poly, RatFuncMatrix, RationalFunction

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

Z = sympy.Symbol("z")


@st.composite
def gaussians(draw, max_num=5, max_den=4):
    a = Fraction(draw(st.integers(-max_num, max_num)), draw(st.integers(1, max_den)))
    b = Fraction(draw(st.integers(-max_num, max_num)), draw(st.integers(1, max_den)))
    return GaussianRational(a, b)


@st.composite
def polys(draw, max_degree=3, nonzero=False):
    coeffs = draw(st.lists(gaussians(), min_size=1, max_size=max_degree + 1))
    p = Poly(coeffs)
    if nonzero and not p:
        p = Poly.const(draw(gaussians().filter(bool)) if draw(st.booleans()) else 1)
    return p


@st.composite
def ratfuncs(draw, max_degree=2):
    return RationalFunction(draw(polys(max_degree)), draw(polys(max_degree, nonzero=True)))


@st.composite
def matrices(draw, n=None, max_degree=1):
    n = draw(st.integers(1, 2)) if n is None else n
    return RatFuncMatrix([[draw(ratfuncs(max_degree)) for _ in range(n)] for _ in range(n)])


def gr_to_sympy(g: GaussianRational):
    return sympy.Rational(int(g.re.numerator), int(g.re.denominator)) + sympy.I * sympy.Rational(
        int(g.im.numerator), int(g.im.denominator))


def poly_to_sympy(p: Poly):
    return sum((gr_to_sympy(c) * Z ** k for k, c in enumerate(p.coeffs)), sympy.Integer(0))


def rf_to_sympy(f: RationalFunction):
    return poly_to_sympy(f.num) / poly_to_sympy(f.den)


def sympy_equal(a, b) -> bool:
    return sympy.cancel(sympy.together(sympy.expand(a - b))) == 0


def winding_oracle(vertices, point, samples=400) -> int:
    """Accumulated argument of (z - point) along a finely sampled polygon."""
    total = 0.0
    for a, b in zip(vertices[:-1], vertices[1:]):
        ts = np.linspace(0.0, 1.0, samples)
        zs = a + (b - a) * ts - point
        total += float(np.sum(np.angle(zs[1:] / zs[:-1])))
    return round(total / (2 * np.pi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
