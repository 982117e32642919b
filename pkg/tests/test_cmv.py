import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skewspec.cmv import (
    assemble_finite_cmv,
    product_form_A,
    reduction_phases,
    schrodinger_reduction,
    tridiagonal_A,
    unitarity_defect,
)
from skewspec.errors import ContractViolation, ReductionUnavailable
from skewspec.sampling import SamplingFunction, VerblunskyPath, verblunsky_path
from skewspec.schrodinger import PotentialSpec, schrodinger_operator
from skewspec.spectral import cmv_eigenvalues, eigs_symmetric_tridiag
from skewspec.torus import GOLDEN, SkewShiftMap, TorusPoint, inverse_step

M2 = SkewShiftMap(2, GOLDEN)


def random_path(rng, a, b):
    n = b - a + 1
    alphas = 0.9 * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    return VerblunskyPath.from_alphas(a, alphas)


def test_free_operator_is_unitary():
    op = assemble_finite_cmv(VerblunskyPath.from_alphas(0, np.zeros(4)))
    assert unitarity_defect(op) < 1e-14
    assert np.array_equal(op.dense("L") @ op.dense("M"), op.dense("E"))


def test_single_site():
    op = assemble_finite_cmv(VerblunskyPath.from_alphas(0, [0.4]), np.exp(0.3j), np.exp(1.7j))
    assert op.E.shape == (1, 1)
    assert abs(abs(op.E[0, 0]) - 1) < 1e-15


def test_phases_must_be_unimodular():
    with pytest.raises(ContractViolation):
        assemble_finite_cmv(VerblunskyPath.from_alphas(0, [0.1, 0.2]), beta=0.5)


@pytest.mark.parametrize("a,b", [(0, 9), (1, 10), (0, 10), (1, 9), (-5, 5), (-4, 4)])
def test_parity_layouts(rng, a, b):
    """Even/odd endpoints on either side: unitarity and closed-form A(z)."""
    op = assemble_finite_cmv(random_path(rng, a, b), np.exp(0.4j), np.exp(-1.1j))
    assert unitarity_defect(op) < 1e-12
    z = np.exp(2j * np.pi * rng.random())
    assert np.abs(tridiagonal_A(op, z, certify=False).dense() - product_form_A(op, z)).max() < 1e-13
    w = cmv_eigenvalues(op)
    assert np.abs(np.abs(w) - 1).max() < 1e-8


def test_random_unitarity_n64(rng):
    for _ in range(10):
        op = assemble_finite_cmv(random_path(rng, -32, 31), np.exp(2j * rng.random()), 1.0)
        assert unitarity_defect(op) < 1e-12


def test_closed_form_certified_100_paths(rng):
    worst = 0.0
    for _ in range(100):
        op = assemble_finite_cmv(random_path(rng, 0, 63))
        T = tridiagonal_A(op, np.exp(2j * np.pi * rng.random()))
        worst = max(worst, T.certified_error)
    assert worst < 1e-13


def test_free_A_at_one():
    op = assemble_finite_cmv(VerblunskyPath.from_alphas(0, np.zeros(6)))
    T = tridiagonal_A(op, 1.0, certify=False)
    # boundary entries carry the phases; interior diagonal vanishes
    assert np.all(T.diag[1:-1] == 0)
    assert T.upper.tolist() == [1, -1, 1, -1, 1]


def test_equal_neighbours_cancel_at_minus_one():
    # omega = 0 keeps x fixed, so every alpha equals lambda when x_r = 0
    m = SkewShiftMap(2, 0.0)
    path = verblunsky_path(SamplingFunction.canonical(0.5), m, [0.0, 0.0], 0, 7)
    T = tridiagonal_A(assemble_finite_cmv(path), -1.0, certify=False)
    even = np.arange(8) % 2 == 0
    assert np.allclose(T.diag[even][1:], 0.0, atol=1e-15)


def test_reduction_coupling_and_hopping():
    path = verblunsky_path(SamplingFunction.canonical(0.6), M2, [0.2, 0.7], 1, 20)
    op = assemble_finite_cmv(path)
    T = tridiagonal_A(op, -1.0, certify=False)
    assert np.allclose(np.abs(T.upper), 0.8)
    H, g = schrodinger_reduction(op)
    assert g == pytest.approx(0.75)
    assert np.all(H.tridiagonal().upper == 1)


def test_reduction_small_lambda_is_free():
    path = verblunsky_path(SamplingFunction.canonical(1e-9), M2, [0.2, 0.7], 1, 20)
    H, g = schrodinger_reduction(assemble_finite_cmv(path))
    assert np.abs(H.diagonal[1:-1]).max() < 1e-8


def test_reduction_needs_constant_modulus(rng):
    with pytest.raises(ReductionUnavailable):
        schrodinger_reduction(assemble_finite_cmv(random_path(rng, 0, 9)))


def _reduced_pair(lam, x, a, b):
    f = SamplingFunction.canonical(lam)
    rho = math.sqrt(1 - lam * lam)
    g = lam / rho
    path = verblunsky_path(f, M2, x, a, b)
    beta, beta_t = reduction_phases(verblunsky_path(f, M2, x, a - 1, a - 1).alphas[0], path.alphas[-1])
    H, g_red = schrodinger_reduction(assemble_finite_cmv(path, beta, beta_t))
    # the reduced diagonal at j is g f(T^{j-1} x): base point T^{-1} x
    direct = schrodinger_operator(PotentialSpec(g, M2, inverse_step(M2, TorusPoint(x))), a, b)
    return H, direct, g, g_red


@given(st.floats(0.05, 0.9), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_reduction_equals_direct_assembly(lam, x1, x2):
    H, direct, g, g_red = _reduced_pair(lam, [x1, x2], 1, 300)
    assert g_red == pytest.approx(g, rel=1e-14)
    assert np.abs(H.diagonal - direct.diagonal).max() < 1e-12


def test_reduction_eigenvalues_n128():
    H, direct, _, _ = _reduced_pair(0.5, [0.31, 0.62], 1, 128)
    assert np.abs(eigs_symmetric_tridiag(H) - eigs_symmetric_tridiag(direct)).max() < 1e-10


def test_A_minus_one_is_not_real():
    """A(-1) differs from its real part by an imaginary diagonal only."""
    path = verblunsky_path(SamplingFunction.canonical(0.5), M2, [0.31, 0.62], 1, 64)
    T = tridiagonal_A(assemble_finite_cmv(path), -1.0, certify=False)
    assert np.abs(T.upper.imag).max() == 0
    assert np.abs(T.diag.imag).max() > 0.1
