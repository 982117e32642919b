import numpy as np
import pytest
from hypothesis import given, strategies as st

from skewspec.errors import ContractViolation, NearSpectrumError
from skewspec.schrodinger import (
    PotentialSpec,
    free_operator,
    green_entry_schrodinger,
    potential_at,
    potentials,
    sampling_f,
    schrodinger_operator,
)
from skewspec.spectral import eigs_symmetric_tridiag
from skewspec.torus import GOLDEN, SkewShiftMap, TorusPoint
from skewspec.tridiag import Tridiagonal

M2 = SkewShiftMap(2, GOLDEN)


def test_potential_examples():
    assert sampling_f(np.array([0.0, 0.37])) == 0.0
    spec = PotentialSpec(1.0, M2, TorusPoint([0.5, 0.25]))
    assert abs(potential_at(spec, 0)) < 1e-15
    with pytest.raises(ContractViolation):
        PotentialSpec(1.0, SkewShiftMap(1), TorusPoint([0.1]))
    with pytest.raises(ContractViolation):
        PotentialSpec(-1.0, M2, TorusPoint([0.1, 0.2]))


def test_potential_range(rng):
    g = 1.7
    pts = rng.random((100_000, 2))
    assert np.abs(g * sampling_f(pts)).max() <= 2 * g


def test_green_one_site():
    assert green_entry_schrodinger(free_operator(1, 1), 1j, 1, 1) == pytest.approx(1j)


def test_green_matches_dense_inverse():
    op = free_operator(1, 5)
    G = np.linalg.inv(op.dense() - 3 * np.eye(5))
    for k in range(1, 6):
        for l in range(1, 6):
            assert abs(green_entry_schrodinger(op, 3.0, k, l) - G[k - 1, l - 1]) < 1e-12


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True),
       st.floats(-3, 3), st.floats(0.01, 1))
def test_green_symmetry(x1, x2, re, im):
    op = schrodinger_operator(PotentialSpec(1.0, M2, TorusPoint([x1, x2])), -10, 10)
    z = complex(re, im)
    val, cond = green_entry_schrodinger(op, z, -3, 7, return_condition=True)
    assert abs(val - green_entry_schrodinger(op, z, 7, -3)) < 1e-12
    assert np.isfinite(cond)


def test_green_at_eigenvalue_raises():
    op = free_operator(1, 3)
    with pytest.raises(NearSpectrumError):
        green_entry_schrodinger(op, np.sqrt(2), 1, 1)


@given(st.floats(0, 5), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_gershgorin(g, x1, x2):
    op = schrodinger_operator(PotentialSpec(g, M2, TorusPoint([x1, x2])), 1, 64)
    ev = eigs_symmetric_tridiag(op)
    assert ev[0] >= -2 - 2 * g and ev[-1] <= 2 + 2 * g


def test_restrict_and_window():
    spec = PotentialSpec(1.0, M2, TorusPoint([0.1, 0.2]))
    op = schrodinger_operator(spec, -5, 5)
    sub = op.restrict(-1, 2)
    assert np.allclose(sub.diagonal, potentials(spec, -1, 2), rtol=0, atol=1e-12)
    with pytest.raises(ContractViolation):
        op.restrict(-6, 0)


@given(st.integers(1, 30))
def test_tridiagonal_solve_matches_dense(n):
    rng = np.random.default_rng(n)
    c = lambda k: rng.standard_normal(k) + 1j * rng.standard_normal(k)
    T = Tridiagonal(c(n - 1), c(n) + 4, c(n - 1))
    rhs = c(n)
    assert np.allclose(T.solve(rhs), np.linalg.solve(T.dense(), rhs), atol=1e-12)
    assert np.allclose(T.solve(rhs, trans="C"), np.linalg.solve(T.dense().conj().T, rhs), atol=1e-12)
    assert np.allclose(T.matvec(rhs), T.dense() @ rhs, atol=1e-12)
