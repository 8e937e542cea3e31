import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vessel_lab.errors import DomainError, IntervalError, PreconditionError
from vessel_lab.params import sl_parameters
from vessel_lab.vessel import (classify, diag_vessel, evolve_B, krylov_rank, lyapunov_residual,
                               normalize_X0, pbh_minimal, peano_baker_B, rank1_vessel,
                               standard_construction, vessel_residuals)

from conftest import rank1_tau


def rank1_B(x, kappa=1.0):
    return np.array([[np.cos(kappa * x), -1j * kappa * np.sin(kappa * x)]])


@pytest.mark.parametrize("x", [0.0, 0.37, 1.0, math.pi, 7.5, 10.0])
def test_rank1_closed_form(rank1, x):
    assert np.max(np.abs(rank1.B(x) - rank1_B(x))) < 1e-8
    assert abs(rank1.X(x)[0, 0] - rank1_tau(x)) < 1e-8


def test_rank1_gamma_star_at_zero(rank1):
    assert np.max(np.abs(rank1.gamma_star(0.0) - np.array([[0, 1], [-1, 1j]]))) < 1e-12


@pytest.mark.parametrize("kappa", [0.5, 2.0])
def test_rank1_kappa(kappa):
    v = rank1_vessel(kappa)
    assert np.max(np.abs(v.B(1.3) - rank1_B(1.3, kappa))) < 1e-8


@pytest.mark.parametrize("name", ["rank1", "diag", "curve8", "zero"])
def test_four_conditions_hold(request, name):
    v = request.getfixturevalue(name)
    for x in np.linspace(0, 10, 11):
        assert vessel_residuals(v, x).max() < 1e-6


def test_off_grid_state_matches_closed_form(rank1):
    x = 2.0 + 1 / 1000
    assert np.max(np.abs(rank1.B(x) - rank1_B(x))) < 1e-10


def test_negative_direction():
    # tau = 1 + x/2 + sin(2x)/4 vanishes near x = -2.48
    with pytest.warns(RuntimeWarning):
        v = rank1_vessel(span=(-3.0, 3.0), interval=(-math.inf, math.inf))
    assert -2.5 < v.valid_range[0] < -2.45
    assert np.max(np.abs(v.B(-2.0) - rank1_B(-2.0))) < 1e-8
    assert vessel_residuals(v, -2.0).max() < 1e-6


def test_evolve_B_convergence_order():
    v = rank1_vessel()
    exact = rank1_B(5.0)
    errs = [np.max(np.abs(evolve_B(v, 5.0, steps=n) - exact)) for n in (40, 80, 160)]
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_peano_baker_oracle(diag):
    xs = np.array([0.5, 2.0, 4.0])
    series = peano_baker_B(diag.A, diag.B0, diag.params, 0.0, xs)
    for x, Bs in zip(xs, series):
        assert np.max(np.abs(Bs - diag.B(x))) < 1e-7


def test_construction_preconditions():
    p = sl_parameters()
    with pytest.raises(PreconditionError):
        standard_construction(p, [[1j]], [[1.0, 0.0]], [[1.0, 1j], [0, 1]])
    with pytest.raises(PreconditionError) as exc:
        standard_construction(p, [[1j]], [[1.0, 1.0]], [[1.0]])
    assert exc.value.residual == pytest.approx(2.0)
    with pytest.raises(PreconditionError):
        standard_construction(p, [[1j]], [[1.0, 0.0]], [[0.0]])


def test_domain_and_interval_errors(rank1):
    with pytest.raises(DomainError):
        rank1.B(-1.0)
    with pytest.warns(RuntimeWarning):
        v = diag_vessel(X0=np.diag([1.0, -0.05]))
    lo, hi = v.valid_range
    assert hi < 10
    with pytest.raises(IntervalError):
        v.X(hi + 0.5)


def test_inertia_change_truncates():
    # X0 = diag(1, -eps) crosses singularity between grid points for small eps
    with pytest.warns(RuntimeWarning):
        v = diag_vessel(X0=np.diag([1.0, -1e-4]))
    lo, hi = v.valid_range
    assert hi < 0.01


def test_classify_rank1(rank1):
    c = classify(rank1)
    assert c.dissipative and c.minimal
    assert c.m_A == pytest.approx(1.0)
    assert c.krylov_rank == 1
    assert set(c.negative_squares) == {0}


def test_classify_zero(zero):
    c = classify(zero)
    assert not c.minimal and c.krylov_rank == 0


def test_pbh_and_krylov_disagree_only_on_degenerate():
    A = np.diag([1j, 1j])
    B = np.array([[1.0, 0.0], [1.0, 0.0]])
    assert not pbh_minimal(A, B)
    assert krylov_rank(A, B) == 1
    assert pbh_minimal(np.diag([1j, 4j]), B)


@given(st.floats(0.3, 2.0), st.floats(0.0, 10.0))
def test_X_hermitian_and_monotone(kappa, x):
    v = rank1_vessel(kappa, density=128)
    assert np.max(np.abs(v.X(x) - v.X(x).conj().T)) < 1e-12
    assert v.X(x)[0, 0].real >= v.X0[0, 0].real - 1e-12


@given(st.floats(0.0, 9.0), st.floats(0.01, 1.0))
def test_diag_X_monotone(x, dx):
    v = diag_vessel()
    gap = v.X(x + dx) - v.X(x)
    assert np.min(np.linalg.eigvalsh(gap)) > -1e-10


@given(st.floats(0.0, 10.0))
def test_minimality_permanent(x):
    v = diag_vessel()
    assert pbh_minimal(v.A, v.B(x))
    assert lyapunov_residual(v.A, v.X(x), v.B(x), v.params.s1(x)) < 1e-8


@pytest.mark.parametrize("X0", [np.diag([2.0, 0.5]), np.diag([1.0, 3.0])])
def test_normalize_X0(X0):
    v = diag_vessel(X0=X0)
    w = normalize_X0(v)
    assert np.allclose(w.X0, np.eye(2))
    for x in (0.5, 3.0, 7.0):
        ratio_v = np.linalg.det(v.X(x)) / np.linalg.det(v.X0)
        ratio_w = np.linalg.det(w.X(x)) / np.linalg.det(w.X0)
        assert ratio_v == pytest.approx(ratio_w, rel=1e-9)


def test_normalize_rejects_indefinite():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        v = diag_vessel(X0=np.diag([1.0, -2.0]))
    with pytest.raises(PreconditionError):
        normalize_X0(v)
