import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from conftest import gaussians, matrices
from pvdescent.algebra import GaussianRational, parse_system
from pvdescent.errors import OutOfDisk, PoleEvaluation, SingularInitial
from pvdescent.series import (SeriesMatrix, defining_equation_residual, evaluate_series, fundamental_series,
                              local_expand, radius_hint, recursion_residual)


def scalar(coeffs):
    return [complex(c[0][0]) for c in coeffs]


def test_local_expand_constant():
    A = local_expand(parse_system("[[1]]"), 0.3 + 0.2j, 6)
    assert A[0][0, 0] == 1 and not np.any(A[1:])


def test_local_expand_inverse_z_at_one():
    for exact in (False, True):
        c = local_expand(parse_system("[[1/z]]"), 1, 10, exact=exact)
        assert scalar(c) == [(-1) ** k for k in range(10)]


def test_local_expand_geometric():
    c = local_expand(parse_system("[[1/(1-z)]]"), 0, 12, exact=True)
    assert all(x[0][0] == GaussianRational(1) for x in c)


def test_local_expand_at_pole():
    with pytest.raises(PoleEvaluation):
        local_expand(parse_system("[[1/z]]"), 0, 4)
    with pytest.raises(PoleEvaluation):
        local_expand(parse_system("[[1/z]]"), 0, 4, exact=True)


def test_exp_coefficients():
    W = fundamental_series(parse_system("[[1]]"), 0, 12, exact=True)
    assert [w[0][0] for w in W.coeffs] == [GaussianRational(1) / math.factorial(k) for k in range(12)]


def test_nilpotent_system():
    W = fundamental_series(parse_system("[[0,1],[0,0]]"), 0, 6)
    assert np.array_equal(W.coeffs[0], np.eye(2))
    assert np.array_equal(W.coeffs[1], [[0, 1], [0, 0]])
    assert not np.any(W.coeffs[2:])


def test_imaginary_exponential():
    W = fundamental_series(parse_system("[[i]]"), 0, 16, exact=True)
    i = GaussianRational(0, 1)
    assert [w[0][0] for w in W.coeffs] == [i ** k / math.factorial(k) for k in range(16)]


def test_evaluate_series_examples():
    W = fundamental_series(parse_system("[[1]]"), 0, 40)
    assert np.array_equal(evaluate_series(W, 0), np.eye(1))
    assert evaluate_series(W, 1)[0, 0] == pytest.approx(math.e, abs=1e-12)
    P = fundamental_series(parse_system("[[1/(z-2)]]"), 0, 40)
    with pytest.raises(OutOfDisk):
        evaluate_series(P, 0.9 * P.radius_hint)


def test_evaluate_series_error_estimate_covers_truth():
    W = fundamental_series(parse_system("[[1/(z-2)]]"), 0, 20)
    value, err = evaluate_series(W, 0.9, track_error=True)
    truth = (0.9 - 2) / (0 - 2)  # W = (z - 2)/(z0 - 2)
    assert abs(value[0, 0] - truth) <= err + 1e-15


def test_singular_initial():
    with pytest.raises(SingularInitial):
        fundamental_series(parse_system("[[1,0],[0,1]]"), 0, 4, W0=[[1, 1], [1, 1]])
    with pytest.raises(SingularInitial):
        fundamental_series(parse_system("[[1,0],[0,1]]"), 0, 4, W0=[[1, 1], [1, 1]], exact=True)


def test_radius_hint():
    assert radius_hint(parse_system("[[1/(z^2+1)]]"), 0) == pytest.approx(1.0)
    assert radius_hint(parse_system("[[z]]"), 0) == math.inf


@given(matrices(max_degree=1), gaussians())
def test_recursion_identity_exact(A, center):
    try:
        W = fundamental_series(A, center, 10, exact=True)
    except PoleEvaluation:
        return
    assert recursion_residual(A, W) == []
    assert defining_equation_residual(A, W) == []


def test_residual_checks_detect_corruption():
    A = parse_system("[[1/(z-2), z],[i, 1]]")
    W = fundamental_series(A, 0, 10, exact=True)
    coeffs = [[list(r) for r in w] for w in W.coeffs]
    coeffs[5][0][1] = coeffs[5][0][1] + GaussianRational(1, 1000)
    bad = SeriesMatrix(W.center, tuple(tuple(tuple(r) for r in w) for w in coeffs), W.radius_hint, exact=True)
    assert 5 in recursion_residual(A, bad)
    assert 4 in defining_equation_residual(A, bad)


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.floats(-0.9, 0.9))
def test_constant_system_matches_expm(entries, t):
    C = np.array(entries).reshape(2, 2)
    A = parse_system("[[" + "],[".join(", ".join(str(GaussianRational.from_complex(x, 6).re) for x in row)
                                       for row in C) + "]]")
    Cq = np.array([[complex(e.constant_value()) for e in row] for row in A.entries])
    W = fundamental_series(A, 0, 64)
    assert np.allclose(evaluate_series(W, t), scipy.linalg.expm(t * Cq), atol=1e-12)


def test_float_and_exact_modes_agree():
    A = parse_system("[[1/(z-2), z],[i, (1+i)/(z+3)]]")
    We = fundamental_series(A, GaussianRational(1, 2) / 3, 20, exact=True).as_array()
    Wf = fundamental_series(A, complex(GaussianRational(1, 2) / 3), 20).as_array()
    assert np.allclose(We, Wf, rtol=1e-12, atol=1e-14)


def test_deterministic():
    A = parse_system("[[1/(z-2), z],[i, 1]]")
    a = fundamental_series(A, 0.1, 30).as_array()
    b = fundamental_series(A, 0.1, 30).as_array()
    assert np.array_equal(a, b)
