import cmath
import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from pvdescent.algebra import conjugate_matrix
from pvdescent.errors import InputError, LogBranchFailure, NoConvergence
from pvdescent.monodromy import monodromy_rep
from pvdescent.realizer import (FuchsianSystem, TargetData, matrix_log, real_system_monodromy,
                                realize_and_descend, refine, residue_ansatz, symmetrize_targets)


def targets(points, gens, base=None):
    return TargetData([np.atleast_2d(np.asarray(g, dtype=complex)) for g in gens], points, base)


# --- target data -----------------------------------------------------------------------------


def test_target_validation():
    with pytest.raises(InputError):
        targets([1 - 1j], [[[2]]])  # lower half plane
    with pytest.raises(InputError):
        targets([2.0], [[[2]]])  # real axis
    with pytest.raises(InputError):
        targets([1j, 1j], [[[2]], [[3]]])
    with pytest.raises(InputError):
        targets([1j], [[[1, 1], [1, 1]]])  # singular generator
    with pytest.raises(InputError):
        targets([1j, 2j, 3j, 4j], [[[2]]] * 4)  # outside supported scope
    with pytest.raises(InputError):
        targets([1j], [[[2]]], base=1j)


def test_target_json_round_trip():
    t = targets([1j, 2 + 1j], [[[1, 0.5j], [0, 2]], [[1j, 0], [0, -1j]]], base=-3.0)
    again = TargetData.from_json(json.dumps(t.to_dict()))
    assert again.points == t.points and again.base == t.base
    assert all(np.array_equal(a, b) for a, b in zip(again.generators, t.generators))
    with pytest.raises(InputError):
        TargetData.from_json("{not json")
    with pytest.raises(InputError):
        TargetData.from_json('{"points": [[0, 1]]}')


# --- symmetrization and ansatz ---------------------------------------------------------------


def test_symmetrize_scalar():
    S, rep = symmetrize_targets(targets([1j], [[[2]]]))
    assert S == [1j, -1j]
    assert [m[0, 0] for m in rep.matrices] == [2, 2]
    w = cmath.exp(1j * math.pi / 3)
    _, rep = symmetrize_targets(targets([1j], [[[w]]]))
    assert rep.matrices[1][0, 0] == w.conjugate()


def test_symmetrize_two_points_mirrored_loops():
    S, rep = symmetrize_targets(targets([1 + 1j, -1 + 1j], [np.eye(2), 2 * np.eye(2)]))
    assert S == [1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]
    assert len(rep.loops) == 4
    for k in range(2):
        assert rep.loops[k + 2].vertices == rep.loops[k].mirrored().vertices


def test_matrix_log_agrees_with_scipy(rng):
    for _ in range(5):
        C = scipy.linalg.expm((rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))) / 3)
        L, _ = matrix_log(C)
        assert np.allclose(L, scipy.linalg.logm(C), atol=1e-10)
        assert np.allclose(scipy.linalg.expm(L), C, atol=1e-10)


def test_matrix_log_branch_failure():
    with pytest.raises(LogBranchFailure):
        matrix_log(np.array([[-1, 1], [0, -1]], dtype=complex))
    L, method = matrix_log(np.array([[-1]], dtype=complex))
    assert L[0, 0] == pytest.approx(1j * math.pi) and "+pi" in method


def test_ansatz_examples():
    S, rep = symmetrize_targets(targets([1j], [[[cmath.exp(2j * math.pi / 3)]]]))
    sys0 = residue_ansatz(S, rep)
    assert sys0.residues[0][0, 0] == pytest.approx(1 / 3)
    S, rep = symmetrize_targets(targets([1j], [np.eye(2)]))
    assert np.allclose(residue_ansatz(S, rep).residues[0], 0)


def test_ansatz_exact_for_commuting_diagonal_targets():
    C = np.diag([cmath.exp(2j * math.pi / 3), 2.0])
    S, rep = symmetrize_targets(targets([0.5 + 1j], [C]))
    sys0 = residue_ansatz(S, rep)
    got = monodromy_rep(sys0, rep.loops)
    assert got.max_deviation(rep) < 1e-10


def test_ansatz_is_conjugate_symmetric():
    S, rep = symmetrize_targets(targets([1j, 2 + 1j], [[[1, 0.2j], [0.1, 1]], [[1j, 0], [0.3, 1]]]))
    sys0 = residue_ansatz(S, rep)
    assert sys0.is_conjugate_symmetric()
    for k in range(2):
        assert np.array_equal(sys0.residues[k + 2], sys0.residues[k].conj())
    assert sys0.to_ratfunc().is_real()


# --- refinement --------------------------------------------------------------------------------


@settings(max_examples=10)
@given(st.floats(0, 2 * math.pi, exclude_max=True), st.floats(-2, 2), st.floats(0.5, 2))
def test_scalar_refinement_is_immediate(theta, x, y):
    S, rep = symmetrize_targets(targets([complex(x, y)], [[[cmath.exp(1j * theta)]]]))
    out = refine(residue_ansatz(S, rep), rep, tol=1e-10)
    assert out.info["iterations"] <= 1 and out.info["residual"] < 1e-10


def test_refine_near_identity_pair(rng):
    gens = [np.eye(2) + 0.1 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / 2 for _ in range(2)]
    S, rep = symmetrize_targets(targets([1 + 1j, -1 + 1j], gens))
    out = refine(residue_ansatz(S, rep), rep, tol=1e-10, max_iter=10)
    assert out.info["residual"] < 1e-8 and out.info["iterations"] <= 10
    r = 2
    for k in range(r):
        assert np.array_equal(out.residues[k + r], out.residues[k].conj())
    # the monodromy recomputed from scratch matches the targets
    assert monodromy_rep(out, rep.loops).max_deviation(rep) < 1e-8


def test_refine_reports_no_convergence(rng):
    gens = [np.eye(2) + 0.1 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) for _ in range(2)]
    S, rep = symmetrize_targets(targets([1 + 1j, -1 + 1j], gens))
    sys0 = residue_ansatz(S, rep)
    with pytest.raises(NoConvergence) as info:
        refine(sys0, rep, tol=1e-14, max_iter=1)
    assert info.value.exit_code == 3 and info.value.iterations == 1


# --- full realization ---------------------------------------------------------------------------


def test_realize_scalar_two_at_i():
    real = realize_and_descend(targets([1j], [[[2]]]))
    assert real.report["iterations"] == 0 and real.report["monodromy_residual"] < 1e-10
    # log(2) / (pi (z^2 + 1)) evaluated off the axis
    for z in (0.3, 2 + 0.5j):
        want = math.log(2) / (math.pi * (z * z + 1))
        assert real.exact_system.evaluate(z)[0, 0] == pytest.approx(want, abs=1e-13)
    assert real.exact_system.is_real() and conjugate_matrix(real.exact_system) == real.exact_system
    assert real.report["real_coefficients"] and real.real_system.shape == (2, 2)
    assert real.report["trace_residual"] < 1e-12
    assert real.report["descent"].validated


def test_real_system_monodromy_is_kron():
    w = cmath.exp(2j * math.pi / 5)
    real = realize_and_descend(targets([0.5 + 1j], [[[w]]]))
    chk = real_system_monodromy(real)
    assert chk["max_kron_deviation"] < 1e-8
    # the block image of a non-real target is a rotation, not a scalar
    assert chk["max_block_image_deviation"] > 0.1


def test_stage_label_on_failure():
    with pytest.raises(LogBranchFailure) as info:
        realize_and_descend(targets([1j], [[[-1, 1], [0, -1]]]))
    assert info.value.stage == "ansatz" and str(info.value).startswith("[ansatz]")


def test_report_text_lists_every_loop():
    real = realize_and_descend(targets([1j, 3 + 2j], [[[2]], [[1j]]]))
    text = real.report_text()
    for k in range(4):
        assert f"loop {k}:" in text
    assert "certificate validated: yes" in text


def test_fuchsian_system_basics():
    B = [np.array([[0.5]]), np.array([[-0.5]])]
    A = FuchsianSystem([1j, -1j], B)
    z = 0.7 + 0.2j
    assert A.taylor(z, 1)[0][0, 0] == pytest.approx(0.5 / (z - 1j) - 0.5 / (z + 1j))
    assert np.allclose(A.residue_at_infinity(), 0)
    with pytest.raises(InputError):
        FuchsianSystem([1j, 1j], B)
