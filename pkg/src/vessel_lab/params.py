"""Vessel parameters (sigma1, sigma2, gamma, gamma_star on an interval) and
the named parameter families."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ArgumentError, FamilyError, PreconditionError
from .numerics import derivative, is_hermitian

MatrixFn = Union[Callable[[float], np.ndarray], np.ndarray]

FAMILY_TAGS = ("SL", "NLS", "NLS4", "Canonical", "Custom")


def _as_fn(value):
    if value is None or callable(value):
        return value
    arr = np.array(value, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


def _eval(value, x):
    if callable(value):
        return np.asarray(value(float(x)), dtype=np.complex128)
    return value


@dataclass(frozen=True)
class VesselParameters:
    """sigma1, sigma2, gamma and (optionally) gamma_star on ``interval``.

    Each coefficient is either a constant matrix or a callable ``x -> matrix``.
    ``gamma_star`` may be ``None`` when it is to be produced by the linkage
    condition during construction.
    """

    dim_E: int
    sigma1: MatrixFn
    sigma2: MatrixFn
    gamma: MatrixFn
    gamma_star: MatrixFn | None = None
    interval: tuple[float, float] = (-math.inf, math.inf)
    family: str = "Custom"
    family_args: dict = field(default_factory=dict)
    dsigma1: MatrixFn | None = None

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "gamma", "gamma_star", "dsigma1"):
            object.__setattr__(self, name, _as_fn(getattr(self, name)))
        a, b = self.interval
        if not a < b:
            raise ArgumentError(f"interval must satisfy a < b, got {self.interval}")
        if self.family not in FAMILY_TAGS:
            raise FamilyError(f"unknown family tag {self.family!r}")
        for name in ("sigma1", "sigma2", "gamma"):
            val = getattr(self, name)
            if not callable(val) and val.shape != (self.dim_E, self.dim_E):
                raise ArgumentError(f"{name} must be {self.dim_E}x{self.dim_E}")

    @property
    def is_constant(self) -> bool:
        """True when sigma1, sigma2 and gamma are all constant matrices."""
        return not any(callable(v) for v in (self.sigma1, self.sigma2, self.gamma))

    def s1(self, x):
        return _eval(self.sigma1, x)

    def s2(self, x):
        return _eval(self.sigma2, x)

    def g(self, x):
        return _eval(self.gamma, x)

    def gs(self, x):
        if self.gamma_star is None:
            raise FamilyError("gamma_star is not set on these parameters")
        return _eval(self.gamma_star, x)

    def ds1(self, x):
        if self.dsigma1 is not None:
            return _eval(self.dsigma1, x)
        if not callable(self.sigma1):
            return np.zeros((self.dim_E, self.dim_E), dtype=np.complex128)
        return derivative(self.s1, x, 1e-3)

    def contains(self, x: float, slack: float = 1e-12) -> bool:
        a, b = self.interval
        return a - slack <= x <= b + slack

    def violations(self, xs) -> list[str]:
        """List of invariant violations at the sample points ``xs``."""
        out = []
        for x in xs:
            s1, s2 = self.s1(x), self.s2(x)
            if not is_hermitian(s1, 1e-10):
                out.append(f"sigma1 not Hermitian at x={x}")
            if not is_hermitian(s2, 1e-10):
                out.append(f"sigma2 not Hermitian at x={x}")
            if np.linalg.cond(s1) > 1e12:
                out.append(f"sigma1 not invertible at x={x}")
            target = -self.ds1(x)
            g = self.g(x)
            if np.max(np.abs(g + g.conj().T - target)) > 1e-8:
                out.append(f"gamma + gamma^H != -sigma1' at x={x}")
            if self.gamma_star is not None:
                gs = self.gs(x)
                if np.max(np.abs(gs + gs.conj().T - target)) > 1e-8:
                    out.append(f"gamma_star + gamma_star^H != -sigma1' at x={x}")
        return out

    def validate(self, xs) -> None:
        bad = self.violations(xs)
        if bad:
            raise PreconditionError("; ".join(bad))

    def with_gamma_star(self, gamma_star) -> "VesselParameters":
        return VesselParameters(self.dim_E, self.sigma1, self.sigma2, self.gamma, gamma_star,
                                self.interval, self.family, dict(self.family_args), self.dsigma1)


SL_SIGMA1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SL_SIGMA2 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
SL_GAMMA = np.array([[0, 0], [0, 1j]], dtype=np.complex128)


def sl_parameters(interval=(0.0, math.inf)) -> VesselParameters:
    """Sturm-Liouville parameters; gamma_star is produced by construction."""
    return VesselParameters(2, SL_SIGMA1, SL_SIGMA2, SL_GAMMA, None, tuple(interval), "SL")


def sl_gamma_star(beta: float, dbeta: float) -> np.ndarray:
    """The SL output coupling ``[[-i(beta' - beta^2), -beta], [beta, i]]``."""
    return np.array([[-1j * (dbeta - beta**2), -beta], [beta, 1j]], dtype=np.complex128)


def nls_parameters(interval=(0.0, math.inf)) -> VesselParameters:
    return VesselParameters(2, np.eye(2), np.diag([0.5, -0.5]), np.zeros((2, 2)), None,
                            tuple(interval), "NLS")


def nls4_parameters(interval=(0.0, math.inf)) -> VesselParameters:
    return VesselParameters(4, np.eye(4), np.diag([0.5, 0.5, -0.5, -0.5]), np.zeros((4, 4)), None,
                            tuple(interval), "NLS4")


CANONICAL_SIGMA1 = np.array([[0, 1j], [-1j, 0]], dtype=np.complex128)


def canonical_parameters(interval=(0.0, math.inf)) -> VesselParameters:
    return VesselParameters(2, CANONICAL_SIGMA1, np.eye(2), np.zeros((2, 2)), None,
                            tuple(interval), "Canonical")


FAMILIES = {
    "SL": sl_parameters,
    "NLS": nls_parameters,
    "NLS4": nls4_parameters,
    "Canonical": canonical_parameters,
}


def family_parameters(name: str, interval=(0.0, math.inf)) -> VesselParameters:
    key = {k.lower(): k for k in FAMILIES}.get(name.lower())
    if key is None:
        raise FamilyError(f"unknown parameter family {name!r}; choose from {sorted(FAMILIES)}")
    return FAMILIES[key](interval)


def nls_potential(gamma_star: np.ndarray) -> complex:
    """beta in ``gamma_star = [[0, beta], [-conj(beta), 0]]``."""
    return complex(gamma_star[0, 1])


def canonical_potentials(gamma_star: np.ndarray) -> tuple[float, float]:
    """(p, q) in ``gamma_star = [[-ip, -iq], [-iq, ip]]``."""
    return float((1j * gamma_star[0, 0]).real), float((1j * gamma_star[0, 1]).real)


def nls4_potentials(gamma_star: np.ndarray) -> np.ndarray:
    """The 2x2 block ``[[q1, q2], [q3, q4]]`` in ``gamma_star = [[0, Q], [-Q^H, 0]]``."""
    return np.array(gamma_star[:2, 2:], dtype=np.complex128)
