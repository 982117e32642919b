import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skewspec.errors import ContractViolation, GeneratorInvalid
from skewspec.sampling import (
    SamplingFunction,
    TrigPolynomial,
    VerblunskyPath,
    decaying_test_function,
    dyadic_grid,
    lattice_decay_function,
    rho_poly_approx,
    sqrt_taylor,
    sqrt_taylor_bound,
    verblunsky_path,
)
from skewspec.torus import GOLDEN, SkewShiftMap, orbit, orbit_coordinate

M2 = SkewShiftMap(2, GOLDEN)


def poisson_kernel(q, t):
    """sum_m q^|m| e(m t) in closed form."""
    return (1 - q * q) / (1 - 2 * q * np.cos(2 * np.pi * t) + q * q)


def test_canonical_free_and_modulus():
    path = verblunsky_path(SamplingFunction.canonical(0.0), M2, [0.2, 0.4], -5, 5)
    assert np.all(path.alphas == 0) and np.all(path.rhos == 1)
    path = verblunsky_path(SamplingFunction.canonical(0.5), M2, [0.2, 0.4], -50, 50)
    assert np.allclose(np.abs(path.alphas), 0.5, atol=1e-15)
    assert np.allclose(path.rhos, math.sqrt(0.75), atol=1e-15)


def test_lambda_point_six():
    # x_r = 0 at n = 0 gives alpha_0 = 0.6 exactly
    path = verblunsky_path(SamplingFunction.canonical(0.6), M2, [0.3, 0.0], 0, 0)
    assert path.alphas[0] == 0.6
    assert path.rhos[0] == pytest.approx(0.8, abs=1e-15)


def test_generator_rejected():
    with pytest.raises(ContractViolation):
        SamplingFunction.canonical(1.0)
    with pytest.raises(GeneratorInvalid) as exc:
        VerblunskyPath.from_alphas(3, [0.1, 1.0, 0.2])
    assert exc.value.n == 4
    big = TrigPolynomial.from_dict({(0, 1): 0.7, (1, 0): 0.7})
    with pytest.raises(ContractViolation):
        SamplingFunction.trig_poly(big)


@given(st.floats(0, 0.99), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_rho_alpha_identity(lam, x1, x2):
    f = decaying_test_function(0.5, lam / 6.5, [(0, 1), (1, 1)], degree=20)
    path = verblunsky_path(f, M2, [x1, x2], 0, 20)
    assert np.abs(path.rhos**2 + np.abs(path.alphas) ** 2 - 1).max() < 1e-14


def test_truncation_is_projection():
    f = lattice_decay_function(0.5, 0.05, 2, degree=6)
    p = f.fourier(2)
    for D in (0, 2, 4):
        assert p.truncate(D).truncate(D) == p.truncate(D)
    assert p.truncate(3).degree == 3


def test_canonical_truncation():
    f = SamplingFunction.canonical(0.4)
    pts = dyadic_grid(2, 32)
    assert np.abs(f.fourier(2).truncate(1)(pts) - f(pts)).max() == 0.0
    zero = f.fourier(2).truncate(0)
    assert len(zero.values) == 0
    assert np.abs(zero(pts) - f(pts)).max() == pytest.approx(0.4)


def test_two_mode_function_matches_poisson_kernels():
    q = 0.5
    f = decaying_test_function(q, 0.1, [(0, 1), (1, 1)], degree=60)
    pts = np.random.default_rng(0).random((200, 2))
    closed = 0.1 * (poisson_kernel(q, pts[:, 1]) + poisson_kernel(q, pts[:, 0] + pts[:, 1]))
    assert np.abs(f(pts) - closed).max() < 1e-14


def test_lattice_truncation_decay():
    f = lattice_decay_function(0.5, 0.02, 2, degree=20)
    pts = dyadic_grid(2, 64)
    vals = f(pts)
    Ds = np.arange(2, 13)
    errs = [np.abs(f.fourier(2).truncate(int(D))(pts) - vals).max() for D in Ds]
    slope = np.polyfit(Ds, np.log(errs), 1)[0]
    assert abs(slope - math.log(0.5)) < 0.2 * math.log(2)


@given(st.integers(-6, 6), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_compose_lift_matches_orbit(n, x1, x2):
    poly = TrigPolynomial.from_dict({(0, 1): 0.2, (1, -1): 0.1j, (2, 1): 0.05})
    x = np.array([[x1, x2]])
    assert abs(poly.compose_lift(M2, n)(x)[0] - poly(orbit_coordinate(M2, x, n))[0]) < 1e-11


def test_json_round_trip():
    poly = TrigPolynomial.from_dict({(0, 1): 0.25 - 0.5j, (3, -2): 1e-3})
    assert TrigPolynomial.from_json(poly.to_json()) == poly


def test_sqrt_taylor_examples():
    assert sqrt_taylor(0.0, 0) == 1.0 and sqrt_taylor(0.0, 9) == 1.0
    assert abs(sqrt_taylor(0.5, 10) - math.sqrt(0.5)) <= sqrt_taylor_bound(0.5, 10)
    assert sqrt_taylor_bound(0.5, 10) == pytest.approx(1.953125e-3)
    assert abs(sqrt_taylor(0.25, 20) - math.sqrt(0.75)) < 1e-12
    with pytest.raises(ContractViolation):
        sqrt_taylor(1.0, 3)


@given(st.floats(-0.9, 0.9), st.integers(0, 60))
def test_sqrt_tail_bound(x, N):
    r0 = abs(x)
    err = abs(sqrt_taylor(x, N) - math.sqrt(1 - x))
    assert err <= sqrt_taylor_bound(r0, N) + 4 * np.finfo(float).eps


def test_rho_approx_canonical():
    f = SamplingFunction.canonical(0.5)
    p1, p2, rep = rho_poly_approx(f, M2, 0, 4)
    assert rep.alpha_error < 1e-15
    p1, p2, rep = rho_poly_approx(f, M2, 3, 16)
    assert rep.rho_error < 1e-3
    assert p2.degree == 0  # |q1|^2 is constant for a single mode


def test_rho_approx_two_mode_improves():
    f = decaying_test_function(0.5, 0.1, [(0, 1), (1, 1)], degree=24)
    Ds = (1, 4, 9, 16)
    errs = [rho_poly_approx(f, M2, 1, D, grid=64)[2].rho_error for D in Ds]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    # fit log err against sqrt(D): negative slope means exp(-c sqrt D)
    slope = np.polyfit(np.sqrt(Ds), np.log(errs), 1)[0]
    assert slope < 0
