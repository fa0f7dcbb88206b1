"""Infinite-chain magnetization and nearest-neighbour correlators.

All quantities are integrals over the quasi-momentum phi in [0, pi] and are
expressed through the dimensionless field a~ = a/J, inverse temperature
b~ = beta J and anisotropy gamma. The post-quench field is zero, so the
"evolved" forms are the t -> infinity limits after switching the field off.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .observables import CorrelatorSet, EntanglementValue, logarithmic_negativity, two_site_from_correlators

GAMMA_SOFT_FLOOR = 1e-3


class QuadratureError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (error estimate {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ChainPoint:
    a_tilde: float
    beta_tilde: float
    gamma: float = 0.5

    def __post_init__(self):
        if self.gamma == 0:
            raise ValueError("gamma must be nonzero")
        if not self.beta_tilde >= 0:
            raise ValueError(f"beta_tilde must be >= 0, got {self.beta_tilde}")
        if abs(self.gamma) < GAMMA_SOFT_FLOOR:
            warnings.warn(f"|gamma| = {abs(self.gamma):g} is below {GAMMA_SOFT_FLOOR:g}; integrands become nearly singular at phi = pi/2")


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")

    def halved(self) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol / 2, self.rel_tol / 2, self.max_subdivisions)


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def dispersion(x, phi, gamma):
    """Quasiparticle energy (in units of J) at field x."""
    return np.sqrt(gamma**2 * np.sin(phi) ** 2 + (x - np.cos(phi)) ** 2)


def _occupation(beta_tilde: float, lam):
    if math.isinf(beta_tilde):
        return np.ones_like(lam)
    return np.tanh(0.5 * beta_tilde * lam)


def _integrate(f, quad: QuadratureSpec) -> QuadResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f, 0.0, math.pi, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions, full_output=True
        )
    value, err, info = out[:3]
    flagged = len(out) > 3  # QUADPACK returned ier > 0
    if not math.isfinite(value) or (flagged and err > max(quad.abs_tol, quad.rel_tol * abs(value))):
        raise QuadratureError(f"quadrature did not converge in {info['last']} subdivisions", err)
    return QuadResult(value / math.pi, err / math.pi)


def _check_R(R: int) -> None:
    if R not in (-1, 1):
        raise ValueError(f"R must be -1 or +1, got {R}")


# integrands are exposed so that tests can run an independent rule over them
def evolved_G_integrand(R: int, p: ChainPoint):
    g, a = p.gamma, p.a_tilde

    def f(phi):
        lam = dispersion(a, phi, g)
        lam0_sq = g**2 * np.sin(phi) ** 2 + np.cos(phi) ** 2
        first = g * np.sin(phi * R) * np.sin(phi) - np.cos(phi) ** 2
        second = g**2 * np.sin(phi) ** 2 + (np.cos(phi) - a) * np.cos(phi)
        return _occupation(p.beta_tilde, lam) / (lam * lam0_sq) * first * second

    return f


def evolved_magnetization_integrand(p: ChainPoint):
    g, a = p.gamma, p.a_tilde

    def f(phi):
        lam = dispersion(a, phi, g)
        lam0_sq = g**2 * np.sin(phi) ** 2 + np.cos(phi) ** 2
        return -_occupation(p.beta_tilde, lam) / (lam * lam0_sq) * np.cos(phi) * (
            (np.cos(phi) - a) * np.cos(phi) + g**2 * np.sin(phi) ** 2
        )

    return f


def equilibrium_G_integrand(R: int, p: ChainPoint):
    g, a = p.gamma, p.a_tilde

    def f(phi):
        lam = dispersion(a, phi, g)
        return _occupation(p.beta_tilde, lam) / lam * (g * np.sin(phi * R) * np.sin(phi) - np.cos(phi) * (np.cos(phi) - a))

    return f


def equilibrium_magnetization_integrand(p: ChainPoint):
    g, a = p.gamma, p.a_tilde

    def f(phi):
        lam = dispersion(a, phi, g)
        return -_occupation(p.beta_tilde, lam) * (np.cos(phi) - a) / lam

    return f


def evolved_G_result(R: int, point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    _check_R(R)
    return _integrate(evolved_G_integrand(R, point), quad)


def evolved_G(R: int, point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return evolved_G_result(R, point, quad).value


def evolved_magnetization_result(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    return _integrate(evolved_magnetization_integrand(point), quad)


def evolved_magnetization(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return evolved_magnetization_result(point, quad).value


def equilibrium_G_result(R: int, point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    _check_R(R)
    return _integrate(equilibrium_G_integrand(R, point), quad)


def equilibrium_G(R: int, point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return equilibrium_G_result(R, point, quad).value


def equilibrium_magnetization_result(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    return _integrate(equilibrium_magnetization_integrand(point), quad)


def equilibrium_magnetization(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return equilibrium_magnetization_result(point, quad).value


def _assemble(m: QuadResult, gx: QuadResult, gy: QuadResult) -> tuple[CorrelatorSet, dict[str, float]]:
    t_zz = m.value**2 - gy.value * gx.value
    errors = {
        "m_z": m.error,
        "t_xx": gx.error,
        "t_yy": gy.error,
        "t_zz": 2 * abs(m.value) * m.error + abs(gx.value) * gy.error + abs(gy.value) * gx.error,
    }
    return CorrelatorSet(m_z=m.value, t_xx=gx.value, t_yy=gy.value, t_zz=t_zz), errors


def evolved_correlator_set_with_errors(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD):
    return _assemble(
        evolved_magnetization_result(point, quad), evolved_G_result(-1, point, quad), evolved_G_result(1, point, quad)
    )


def equilibrium_correlator_set_with_errors(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD):
    return _assemble(
        equilibrium_magnetization_result(point, quad),
        equilibrium_G_result(-1, point, quad),
        equilibrium_G_result(1, point, quad),
    )


def evolved_correlator_set(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> CorrelatorSet:
    """t -> infinity correlators after switching off the initial field a~."""
    return evolved_correlator_set_with_errors(point, quad)[0]


def equilibrium_correlator_set(point: ChainPoint, quad: QuadratureSpec = DEFAULT_QUAD) -> CorrelatorSet:
    """Canonical correlators at field a~ and inverse temperature b~."""
    return equilibrium_correlator_set_with_errors(point, quad)[0]


def infinite_chain_entanglement(cs: CorrelatorSet) -> EntanglementValue:
    return logarithmic_negativity(two_site_from_correlators(cs))
