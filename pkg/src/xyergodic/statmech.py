"""Spectral decomposition, canonical states, quench evolution and long-time averages."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    energies: np.ndarray  # ascending
    vectors: np.ndarray  # columns are eigenvectors

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def width(self) -> float:
        return float(self.energies[-1] - self.energies[0])

    def degeneracy_tol(self) -> float:
        return DEGENERACY_RTOL * max(self.width, 1e-300)

    def degenerate_blocks(self) -> list[slice]:
        """Contiguous index ranges of (numerically) equal energies."""
        tol = self.degeneracy_tol()
        cuts = np.flatnonzero(np.diff(self.energies) > tol) + 1
        edges = np.concatenate([[0], cuts, [self.dim]])
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]

    def to_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        V = self.vectors
        return V.conj().T @ op @ V

    def from_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        V = self.vectors
        return V @ op @ V.conj().T


def _hermiticity_defect(H: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(H))), 1e-300)
    return float(np.max(np.abs(H - H.conj().T))) / scale


def spectral_decompose(H: np.ndarray) -> SpectralDecomposition:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if _hermiticity_defect(H) > 1e-12:
        raise ValueError("matrix is not Hermitian")
    E, V = np.linalg.eigh(H)
    return SpectralDecomposition(E, V)


def thermal_weights(spectral: SpectralDecomposition, beta: float) -> np.ndarray:
    """Boltzmann probabilities exp(-beta E)/Z, computed relative to the ground energy."""
    if np.isnan(beta) or beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    E = spectral.energies
    if np.isinf(beta):
        w = (E - E[0] <= spectral.degeneracy_tol()).astype(float)
    else:
        w = np.exp(-beta * (E - E[0]))
    return w / w.sum()


def thermal_state(spectral: SpectralDecomposition, beta: float) -> np.ndarray:
    """Canonical state; ``beta = inf`` gives the uniform mixture over the ground manifold."""
    w = thermal_weights(spectral, beta)
    V = spectral.vectors
    rho = (V * w) @ V.conj().T
    return 0.5 * (rho + rho.conj().T)


def evolve(rho0: np.ndarray, spectral: SpectralDecomposition, t: float) -> np.ndarray:
    if rho0.shape != (spectral.dim, spectral.dim):
        raise ValueError(f"state shape {rho0.shape} does not match dimension {spectral.dim}")
    if t == 0:
        return rho0.copy()
    phases = np.exp(-1j * spectral.energies * t)
    r = spectral.to_eigenbasis(rho0)
    r = phases[:, None] * r * phases.conj()[None, :]
    return spectral.from_eigenbasis(r)


def degenerate_mask(spectral: SpectralDecomposition) -> np.ndarray:
    """Boolean matrix selecting eigen-pairs (m, n) with E_m = E_n."""
    mask = np.zeros((spectral.dim, spectral.dim), dtype=bool)
    for blk in spectral.degenerate_blocks():
        mask[blk, blk] = True
    return mask


def dephase(r: np.ndarray, spectral: SpectralDecomposition) -> np.ndarray:
    """Keep only the energy-degenerate blocks of an eigenbasis matrix."""
    out = np.zeros_like(r)
    for blk in spectral.degenerate_blocks():
        out[blk, blk] = r[blk, blk]
    return out


def diagonal_ensemble(rho0: np.ndarray, spectral: SpectralDecomposition) -> np.ndarray:
    """Infinite-time average of the evolved state."""
    return spectral.from_eigenbasis(dephase(spectral.to_eigenbasis(rho0), spectral))


def diagonal_ensemble_expectation(rho0: np.ndarray, spectral: SpectralDecomposition, observable: np.ndarray) -> float:
    """Infinite-time average of tr(rho(t) O) for a linear observable O."""
    r = spectral.to_eigenbasis(rho0)
    o = spectral.to_eigenbasis(observable)
    total = 0.0
    for blk in spectral.degenerate_blocks():
        total += np.sum(r[blk, blk] * o[blk, blk].T)
    return float(np.real(total))


@dataclass(frozen=True)
class SamplingPlan:
    t_max: float = 1000.0
    n_samples: int = 2000
    seed: int = 20110516

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("time sampling needs at least 2 samples")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")

    def times(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.uniform(0.0, self.t_max, size=self.n_samples)


@dataclass(frozen=True)
class TimeAverageResult:
    mean: float
    std_error: float
    n_samples: int
    window_T: float
    seed: int | None = None

    @classmethod
    def from_samples(cls, values: Sequence[float], plan: SamplingPlan) -> "TimeAverageResult":
        v = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("non-finite functional value in time samples")
        sem = float(np.std(v, ddof=1) / np.sqrt(len(v)))
        return cls(float(v.mean()), sem, len(v), plan.t_max, plan.seed)

    def to_dict(self) -> dict:
        return asdict(self)


def time_sampled_average(
    rho0: np.ndarray,
    spectral: SpectralDecomposition,
    functional: Callable[[np.ndarray], float],
    plan: SamplingPlan,
    reduce: Callable[[np.ndarray], np.ndarray] | None = None,
) -> TimeAverageResult:
    """Mean of ``functional(reduce(rho(t)))`` over uniformly random times in [0, t_max].

    This evolves the full state at every sample and is meant for small
    systems; :class:`xyergodic.quench.QuenchEngine` handles 12-site runs.
    """
    r = spectral.to_eigenbasis(rho0)
    E = spectral.energies
    values = []
    for t in plan.times():
        p = np.exp(-1j * E * t)
        rho_t = spectral.from_eigenbasis(p[:, None] * r * p.conj()[None, :])
        values.append(functional(reduce(rho_t) if reduce is not None else rho_t))
    return TimeAverageResult.from_samples(values, plan)
