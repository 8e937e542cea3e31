import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from vessel_lab.errors import DomainError, FamilyError
from vessel_lab.tau import (beta, check_gamma_star_formula, fit_bounds, potential, tau,
                            tau_derivatives, tau_logderiv, tau_logderiv_prime)
from vessel_lab.vessel import rank1_vessel

from conftest import rank1_tau


def _diag_oracle():
    # X(x) = I + int_0^x c c^T with c = (cos t, cos 2t) for A = diag(i, 4i)
    x, t = sp.symbols("x t", real=True)
    c = sp.Matrix([sp.cos(t), sp.cos(2 * t)])
    X = sp.eye(2) + (c * c.T).applyfunc(lambda e: sp.integrate(e, (t, 0, x)))
    T = sp.simplify(X.det())
    logT = sp.log(T)
    return {name: sp.lambdify(x, expr, "numpy")
            for name, expr in (("tau", T), ("L", sp.diff(logT, x)),
                               ("q", -2 * sp.diff(logT, x, 2)))}


DIAG = _diag_oracle()


@pytest.mark.parametrize("x", [0.0, 0.5, math.pi, 6.0, 10.0])
def test_rank1_tau(rank1, x):
    assert tau(rank1, x) == pytest.approx(rank1_tau(x), abs=1e-10)


def test_rank1_origin_values(rank1):
    assert tau_logderiv(rank1, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert beta(rank1, 0.0) == pytest.approx(-1.0, abs=1e-12)
    assert -2 * tau_logderiv_prime(rank1, 0.0) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.8, 2.5, 5.0, 9.0])
def test_diag_against_symbolic(diag, x):
    assert tau(diag, x) == pytest.approx(DIAG["tau"](x), rel=1e-9)
    assert tau_logderiv(diag, x) == pytest.approx(DIAG["L"](x), abs=1e-8)
    prof = potential(diag, [x])
    assert prof.q[0] == pytest.approx(DIAG["q"](x), abs=1e-6)


def test_potential_grid_vs_pointwise(rank1):
    on = potential(rank1, [1.0, 2.0, 3.0])
    off = potential(rank1, [1.0 + 1e-3, 2.0 + 1e-3])
    x = off.grid
    assert np.allclose(off.logderiv, (0.5 + np.cos(2 * x) / 2) / rank1_tau(x), atol=1e-9)
    assert np.allclose(on.tau, rank1_tau(on.grid), atol=1e-10)
    assert on.cross_check < 1e-6 and off.cross_check < 1e-6


def test_potential_zero(zero):
    prof = potential(zero, zero.valid_grid[::64])
    assert np.all(prof.tau == 1) and np.all(prof.q == 0) and np.all(prof.logderiv == 0)


def test_potential_rejects(nls, rank1):
    with pytest.raises(FamilyError):
        potential(nls, [0.0])
    with pytest.raises(DomainError):
        potential(rank1, [-1.0])


@given(st.floats(0.0, 10.0))
def test_gamma_star_formula(x):
    assert check_gamma_star_formula(_r1(), x) < 1e-6


@given(st.floats(0.0, 10.0))
def test_second_derivative_identity(x):
    # tau''/tau = (tau'/tau)' + (tau'/tau)^2 against the closed form
    t = rank1_tau(x)
    d1 = (0.5 + np.cos(2 * x) / 2) / t
    d2 = -np.sin(2 * x) / t
    L, T2 = tau_derivatives(_r1(), x)
    assert L == pytest.approx(d1, abs=1e-8) and T2 == pytest.approx(d2, abs=1e-8)


_CACHE = []


def _r1():
    if not _CACHE:
        _CACHE.append(rank1_vessel())
    return _CACHE[0]


def test_fit_bounds_rank1():
    v = rank1_vessel(span=(0.0, 100.0))
    fit = fit_bounds(v)
    assert fit.holds
    assert fit.T1 == pytest.approx(0.5, abs=1e-3)
    assert fit.q_bound <= 10


def test_fit_bounds_needs_dissipative_spectrum(nls):
    with pytest.raises(FamilyError):
        fit_bounds(nls)
