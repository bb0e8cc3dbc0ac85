import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jv, sici

from pfnelson.errors import (
    InvalidInput,
    NegativeEigenvalue,
    SingularityAtEndpoint,
    UnsupportedOrder,
)
from pfnelson.numerics import (
    Quadrature,
    bessel_j,
    integrate,
    integrate_pv,
    jacobi_eigen,
    op_norm,
    psd_sqrt,
    psd_sqrt_trace,
    sine_integral,
    sym_eigen,
)


def test_integrate_semi_infinite():
    assert integrate(lambda x: math.exp(-x), 0.0, math.inf) == pytest.approx(1.0, abs=1e-12)


def test_integrate_full_line_gaussian():
    val = integrate(lambda x: math.exp(-x * x), -math.inf, math.inf)
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_integrate_reversed_bounds_flip_sign():
    f = lambda x: x * x
    assert integrate(f, 2.0, 0.0) == pytest.approx(-8.0 / 3.0, rel=1e-12)


def test_integrate_rejects_nan_bound():
    with pytest.raises(InvalidInput):
        integrate(lambda x: x, float("nan"), 1.0)


@pytest.mark.parametrize("s", [0.3, 0.5, 1.0, 1.7])
def test_pv_constant_density(s):
    # PV ∫_0^2 dx/(s - x) = log(s/(2 - s))
    assert integrate_pv(lambda x: 1.0, 0.0, 2.0, s) == pytest.approx(math.log(s / (2 - s)), abs=1e-10)


def test_pv_endpoint_raises():
    with pytest.raises(SingularityAtEndpoint):
        integrate_pv(lambda x: 1.0, 0.0, 2.0, 2.0)


def test_sine_integral_matches_sici():
    for x in (0.0, 0.1, 1.0, 10.0, 123.4):
        assert sine_integral(x) == pytest.approx(sici(x)[0], abs=1e-15)
    assert sine_integral(1e6) == pytest.approx(math.pi / 2, abs=1e-5)


def test_bessel_half_order_closed_form():
    x = 1.3
    assert bessel_j(0.5, x) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), rel=1e-13)
    assert bessel_j(1.0, x) == pytest.approx(jv(1, x), rel=1e-14)


def test_bessel_unsupported_order():
    with pytest.raises(UnsupportedOrder):
        bessel_j(3.0, 1.0)


def test_jacobi_diagonal_and_2x2():
    w, _ = jacobi_eigen(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(w, [-1.0, 2.0, 3.0])
    w, _ = jacobi_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(w, [1.0, 3.0], atol=1e-14)


def test_jacobi_rejects_asymmetric():
    with pytest.raises(InvalidInput):
        jacobi_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=20), st.integers(min_value=0, max_value=10_000))
def test_jacobi_matches_lapack(n, seed):
    X = np.random.default_rng(seed).normal(size=(n, n))
    A = X + X.T
    w, Q = jacobi_eigen(A)
    assert np.allclose(w, np.linalg.eigvalsh(A), atol=1e-10 * max(1.0, np.abs(w).max()))
    assert np.allclose(Q.T @ A @ Q, np.diag(w), atol=1e-9 * max(1.0, np.abs(w).max()))


def test_sym_eigen_switches_to_lapack_above_48():
    X = np.random.default_rng(0).normal(size=(60, 60))
    w, _ = sym_eigen(X + X.T)
    assert np.allclose(w, np.linalg.eigvalsh(X + X.T))


def test_psd_sqrt_squares_back():
    X = np.random.default_rng(1).normal(size=(6, 6))
    A = X @ X.T
    R = psd_sqrt(A)
    assert np.allclose(R @ R, A, atol=1e-10)
    assert psd_sqrt_trace(np.diag([4.0, 9.0, 0.0])) == pytest.approx(5.0)


def test_psd_sqrt_clamps_roundoff_but_rejects_negative():
    assert psd_sqrt_trace(np.diag([1.0, -1e-15])) == pytest.approx(1.0)
    with pytest.raises(NegativeEigenvalue):
        psd_sqrt(np.diag([1.0, -0.1]))


def test_pv_even_about_s_vanishes():
    assert abs(integrate_pv(lambda x: (x - 1.0) ** 2 + 3.0, 0.0, 2.0, 1.0)) <= 1e-12


def test_op_norm_power_iteration():
    A = np.diag([0.5, 2.0, 1.0])
    assert op_norm(lambda x: A @ x, 3, tol=1e-14) == pytest.approx(2.0, rel=1e-10)


def test_quadrature_validation():
    with pytest.raises(InvalidInput):
        Quadrature(abs_tol=-1.0)
