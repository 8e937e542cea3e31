import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from vessel_lab.errors import ArgumentError, IntegrationError, SingularityError
from vessel_lab.numerics import (GridFunction, cmatrix, derivative, fd_weights, fundamental_solution,
                                 gauss_legendre, grid_derivative, is_hermitian, log_det, opnorm,
                                 propagate, stencil_offsets)

finite = st.floats(-3, 3, allow_nan=False)


def _rand_matrix(seed, n):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def test_cmatrix_reshape_and_errors():
    M = cmatrix([1, 2, 3, 4], 2, 2)
    assert M.dtype == np.complex128 and M.shape == (2, 2)
    with pytest.raises(ArgumentError):
        cmatrix([1, 2, 3], 2, 2)
    with pytest.raises(ArgumentError):
        cmatrix([1, 2, 3])


def test_is_hermitian_and_opnorm():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[1, 1j], [1j, 2]]))
    assert not is_hermitian(np.ones((2, 3)))
    assert opnorm(np.zeros((0, 0))) == 0.0
    assert opnorm(np.diag([3.0, -4.0])) == pytest.approx(4.0)


def test_grid_function_checks():
    with pytest.raises(ArgumentError):
        GridFunction(np.array([0.0, 0.0]), np.zeros((2, 1, 1)))
    with pytest.raises(ArgumentError):
        GridFunction(np.array([0.0, 1.0]), np.zeros((3, 1, 1)))


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_log_det_matches_slogdet(seed, n):
    M = _rand_matrix(seed, n)
    sign, ld = np.linalg.slogdet(M)
    z = log_det(M)
    assert z.real == pytest.approx(ld, rel=1e-12, abs=1e-12)
    assert np.exp(1j * z.imag) == pytest.approx(sign, abs=1e-10)


def test_log_det_singular_and_empty():
    with pytest.raises(SingularityError) as exc:
        log_det(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert exc.value.min_pivot is not None
    with pytest.raises(SingularityError):
        log_det(np.zeros((2, 2)))
    assert log_det(np.zeros((0, 0))) == 0


@given(st.integers(1, 12), st.floats(-2, 0), st.floats(0.1, 3))
def test_gauss_legendre_exact_on_polynomials(n, a, length):
    b = a + length
    x, w = gauss_legendre(n, a, b)
    deg = 2 * n - 1
    exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
    assert np.sum(w * x**deg) == pytest.approx(exact, rel=1e-10, abs=1e-10)


def test_gauss_legendre_rejects_bad_input():
    with pytest.raises(ArgumentError):
        gauss_legendre(0, 0, 1)
    with pytest.raises(ArgumentError):
        gauss_legendre(3, 1, 1)


def test_fd_weights_classic():
    assert np.allclose(fd_weights([-2, -1, 0, 1, 2], 1), [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12])
    assert np.allclose(fd_weights([-1, 0, 1], 2), [1, -2, 1])


def test_stencil_offsets_near_ends():
    assert stencil_offsets(0.5, 0.1, 0, 1) == [-2, -1, 0, 1, 2]
    assert stencil_offsets(0.0, 0.1, 0, 1) == [0, 1, 2, 3, 4]
    assert stencil_offsets(1.0, 0.1, 0, 1) == [-4, -3, -2, -1, 0]
    assert len(stencil_offsets(0.0, 0.1, 0, 1, order=2)) == 6
    with pytest.raises(ArgumentError):
        stencil_offsets(0.0, 0.1, 0, 0.2)
    with pytest.raises(ArgumentError):
        stencil_offsets(0.0, 0.1, 0, 1, order=3)


@given(st.lists(finite, min_size=5, max_size=5), st.floats(-1, 1), st.sampled_from([0.0, 0.95]))
def test_derivative_exact_on_quartics(coef, x, lo_shift):
    # interior and one-sided stencils are exact for degree <= 4 (first) / <= 3 (second)
    p = np.polynomial.Polynomial(coef)
    lo = x - lo_shift * 0.05 if lo_shift else -math.inf
    d1 = derivative(p, x, 0.05, lo=lo)
    assert d1 == pytest.approx(p.deriv()(x), abs=1e-8)
    p3 = np.polynomial.Polynomial(coef[:4])
    d2 = derivative(p3, x, 0.05, order=2, lo=lo)
    assert d2 == pytest.approx(p3.deriv(2)(x), abs=1e-7)


def test_derivative_zero_on_constants():
    assert derivative(lambda t: 0.1 + 0.2, 0.3, 1 / 256) == 0.0
    assert derivative(lambda t: 0.7, 0.3, 1 / 256, order=2) == 0.0


def test_grid_derivative_sine():
    h = 1 / 128
    x = np.arange(0, 2, h)
    assert np.max(np.abs(grid_derivative(np.sin(x), h) - np.cos(x))) < 1e-8
    assert np.max(np.abs(grid_derivative(np.sin(x), h, order=2) + np.sin(x))) < 1e-6


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.floats(-2, 2))
def test_fundamental_solution_constant_matches_expm(seed, n, x):
    C = 0.5 * _rand_matrix(seed, n)
    Phi = fundamental_solution(C, 0.0, x)
    assert np.max(np.abs(Phi - sla.expm(C * x))) < 1e-8 * max(1.0, opnorm(sla.expm(C * x)))


def test_fundamental_solution_liouville():
    # det Phi = exp(int tr C)
    C = lambda t: np.array([[np.sin(t), 1j], [t, 0.3 * 1j]])
    Phi = fundamental_solution(C, 0.0, 2.0)
    expect = np.exp((1 - np.cos(2.0)) + 0.3j * 2.0)
    assert np.linalg.det(Phi) == pytest.approx(expect, rel=1e-10)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_rk4_fourth_order(n):
    C = lambda t: np.array([[0, 1], [-(1 + t), 0]], dtype=complex)
    ref = propagate(C, 0.0, 1.0, np.eye(2), steps=1024)
    e1 = np.max(np.abs(propagate(C, 0.0, 1.0, np.eye(2), steps=n) - ref))
    e2 = np.max(np.abs(propagate(C, 0.0, 1.0, np.eye(2), steps=2 * n) - ref))
    assert e1 / e2 >= 8.0


def test_propagate_errors():
    with pytest.raises(IntegrationError):
        propagate(lambda t: np.array([[np.nan]]), 0.0, 1.0, np.eye(1))
    with pytest.raises(IntegrationError):
        propagate(lambda t: np.array([[np.nan]]), 0.0, 0.0, np.eye(1))
    with pytest.raises(ArgumentError):
        propagate(np.eye(1), 0.0, 1.0, np.eye(1), steps=0)
