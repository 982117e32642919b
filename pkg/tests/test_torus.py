import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skewspec.errors import ContractViolation
from skewspec.torus import (
    GOLDEN,
    BallRegion,
    SkewShiftMap,
    TorusPoint,
    closed_form_r2,
    diophantine_quality,
    discrepancy_exponent,
    inverse_step,
    orbit,
    orbit_coordinate,
    return_time_count,
    skew_shift_step,
)

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


def torus_dist(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d).max()


def test_step_examples():
    assert np.array_equal(skew_shift_step(SkewShiftMap(2, 0.0), TorusPoint([0, 0])).coords, [0, 0])
    y = skew_shift_step(SkewShiftMap(2, 0.5), TorusPoint([0.25, 0.5]))
    assert np.allclose(y.coords, [0.75, 0.75], atol=1e-15)
    y = skew_shift_step(SkewShiftMap(3, 0.1), TorusPoint([0.9, 0.9, 0.9]))
    assert torus_dist(y.coords, [0.0, 0.8, 0.8]) < 1e-14


def test_point_validation():
    with pytest.raises(ContractViolation):
        TorusPoint([1.0, 0.2])
    with pytest.raises(ContractViolation):
        SkewShiftMap(0)
    with pytest.raises(ContractViolation):
        skew_shift_step(SkewShiftMap(3), TorusPoint([0.1, 0.2]))
    assert np.allclose(TorusPoint.wrap([-0.25, 2.5]).coords, [0.75, 0.5])


def test_orbit_zero_and_rational_closed_form():
    m = SkewShiftMap(2, 0.5)
    x = TorusPoint([0.3, 0.6])
    assert np.array_equal(orbit_coordinate(m, x, 0).coords, x.coords)
    y = orbit_coordinate(m, TorusPoint([0.0, 0.0]), 4)
    assert torus_dist(y.coords, [0.0, 0.0]) < 1e-14


def test_closed_form_matches_iteration():
    m = SkewShiftMap(2, GOLDEN)
    zero = np.zeros(2)
    traj = orbit(m, zero, 0, 1000)
    n = np.arange(1001)
    exact = np.array([math.fmod(GOLDEN * (k * (k - 1) // 2), 1.0) for k in n])
    assert torus_dist(traj[:, 1], exact) < 1e-9
    x = np.array([0.123, 0.877])
    for k in (1, 17, 500, 1000):
        assert torus_dist(orbit_coordinate(m, x, k), closed_form_r2(m, x, k)) < 1e-9


@given(unit, unit, st.integers(0, 5000), st.integers(0, 5000))
def test_cocycle_consistency(x1, x2, a, b):
    m = SkewShiftMap(2, GOLDEN)
    x = np.array([x1, x2])
    lhs = orbit_coordinate(m, x, a + b)
    rhs = orbit_coordinate(m, orbit_coordinate(m, x, a), b)
    assert torus_dist(lhs, rhs) < 1e-12


@given(st.lists(unit, min_size=3, max_size=3), st.integers(1, 50))
def test_inverse_undoes_forward(xs, n):
    m = SkewShiftMap(3, GOLDEN)
    x = np.array(xs)
    assert torus_dist(orbit_coordinate(m, orbit_coordinate(m, x, n), -n), x) < 1e-12
    assert torus_dist(inverse_step(m, skew_shift_step(m, x)), x) < 1e-15


def test_orbit_rows_are_iterates():
    m = SkewShiftMap(3, 0.3)
    x = np.array([0.1, 0.5, 0.9])
    traj = orbit(m, x, -3, 4)
    assert traj.shape == (8, 3)
    for i, n in enumerate(range(-3, 5)):
        assert torus_dist(traj[i], orbit_coordinate(m, x, n)) < 1e-13


def test_diophantine_examples():
    rep = diophantine_quality(0.5, 10)
    assert rep.kappa_lower == 0.0 and rep.worst_q == 2
    assert diophantine_quality(0.3, 1).kappa_lower == pytest.approx(0.3)
    gold = diophantine_quality(GOLDEN, 1000)
    # the minimum sits at q = 1: dist(omega, Z) = (3 - sqrt 5) / 2
    assert gold.worst_q == 1
    assert gold.kappa_lower == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
    fib = [89, 144, 233, 377, 610, 987]
    # along Fibonacci denominators q * dist(q omega, Z) tends to 1 / sqrt 5
    vals = [q * abs(q * GOLDEN - round(q * GOLDEN)) for q in fib]
    assert all(abs(v - 1 / math.sqrt(5)) < 1e-3 for v in vals)
    with pytest.raises(ContractViolation):
        diophantine_quality(GOLDEN, 0)


@given(st.floats(0.0, 1.0, exclude_max=True), st.integers(1, 200), st.integers(1, 200))
def test_diophantine_monotone(omega, q1, q2):
    lo, hi = sorted((q1, q2))
    assert diophantine_quality(omega, hi).kappa_lower <= diophantine_quality(omega, lo).kappa_lower


def test_return_time_examples():
    m = SkewShiftMap(2, GOLDEN)
    x = TorusPoint([0.3, 0.7])
    full = return_time_count(m, x, BallRegion(TorusPoint([0.5, 0.5]), 0.75), 1000)
    assert full.frequency == 1.0 and full.target_measure == 1.0
    s = return_time_count(m, x, BallRegion(TorusPoint([0.5, 0.5]), 0.1), 100_000)
    assert s.target_measure == pytest.approx(0.04)
    assert abs(s.frequency - 0.04) < 0.008
    s = return_time_count(m, x, BallRegion(TorusPoint([0.5, 0.5]), 0.05), 100_000)
    assert abs(s.frequency - 0.01) < 0.25 * 0.01


def test_ball_wraps_around():
    ball = BallRegion(TorusPoint([0.95, 0.02]), 0.1)
    assert ball.contains(np.array([[0.03, 0.97], [0.5, 0.02]])).tolist() == [True, False]
    with pytest.raises(ContractViolation):
        BallRegion(TorusPoint([0.1, 0.1]), 0.0)


def test_median_error_shrinks_with_horizon():
    m = SkewShiftMap(2, GOLDEN)
    xs = np.random.default_rng(5).random((10, 2))
    ball = BallRegion(TorusPoint([0.4, 0.6]), 0.1)
    slope, errs = discrepancy_exponent(m, xs, ball, [1000, 10_000, 100_000])
    freq_err = errs / np.array([1000, 10_000, 100_000])
    assert freq_err[0] >= freq_err[1] >= freq_err[2]
    assert slope < 1
