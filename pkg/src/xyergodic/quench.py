"""Exact-diagonalization quench engine for finite periodic lattices.

The zero-field Hamiltonian is diagonalized once and every two-site quantity
is assembled from Pauli-pair expectation values in its eigenbasis:

* thermal states need only the eigenbasis diagonals of each Pauli pair;
* the diagonal ensemble keeps the energy-degenerate blocks of rho0;
* time samples use tr(rho(t) O) = p^T (r o O^T) p*, with p = exp(-iEt).

Both the initial thermal state and the zero-field Hamiltonian commute with
the global phase flip, so Pauli pairs with an odd number of x/y factors have
vanishing expectation at all times. Only the seven parity-even pairs are
propagated in time; the others are checked on the static states.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice, ModelParams, build_hamiltonian, parity_operator, pauli_action
from .observables import two_site_from_paulis
from .statmech import SamplingPlan, SpectralDecomposition, spectral_decompose, thermal_weights

log = logging.getLogger(__name__)

LABELS = "ixyz"
PARITY_EVEN = [("z", "i"), ("i", "z"), ("x", "x"), ("x", "y"), ("y", "x"), ("y", "y"), ("z", "z")]
ALL_PAIRS = [(a, b) for a in LABELS for b in LABELS if (a, b) != ("i", "i")]
_CHUNK = 256


def _table_index(a: str, b: str) -> tuple[int, int]:
    return LABELS.index(a), LABELS.index(b)


@dataclass
class BondSeries:
    """Pauli tables of one bond: static (diagonal ensemble) and per time sample."""

    diagonal: np.ndarray  # (4, 4)
    samples: np.ndarray  # (n_samples, 4, 4)

    def two_site_states(self) -> np.ndarray:
        return np.array([two_site_from_paulis(t) for t in self.samples])


class QuenchEngine:
    """Cached spectral data of one lattice at zero field."""

    def __init__(self, lattice: Lattice, params: ModelParams):
        self.lattice = lattice
        self.params = params
        self.n = lattice.n_sites
        log.info("diagonalizing %s (dim %d)", lattice.label, 2**self.n)
        self.spectral: SpectralDecomposition = spectral_decompose(build_hamiltonian(lattice, params, 0.0))
        self._diag_cache: dict[tuple, np.ndarray] = {}

    # -- Pauli pairs in the eigenbasis ---------------------------------
    def _pauli_times_vectors(self, bond, a: str, b: str) -> np.ndarray:
        i, j = bond
        ops = {}
        if a != "i":
            ops[i] = a
        if b != "i":
            ops[j] = b
        target, phase = pauli_action(self.n, ops)
        V = self.spectral.vectors
        if np.any(phase.imag):
            out = np.empty(V.shape, dtype=complex)
            out[target] = phase[:, None] * V
        else:
            out = np.empty(V.shape, dtype=V.dtype)
            out[target] = phase.real[:, None] * V
        return out

    def eigen_diagonal(self, bond, a: str, b: str) -> np.ndarray:
        key = (tuple(bond), a, b)
        if key not in self._diag_cache:
            OV = self._pauli_times_vectors(bond, a, b)
            V = self.spectral.vectors
            self._diag_cache[key] = np.real(np.einsum("in,in->n", V.conj(), OV))
        return self._diag_cache[key]

    def eigen_matrix(self, bond, a: str, b: str) -> np.ndarray:
        """V^dagger O V for the Pauli pair ``a`` on bond[0], ``b`` on bond[1]."""
        V = self.spectral.vectors
        return V.conj().T @ self._pauli_times_vectors(bond, a, b)

    # -- thermal states --------------------------------------------------
    def thermal_table(self, bond, beta_tilde: float) -> np.ndarray:
        beta = beta_tilde / self.params.coupling_J
        w = thermal_weights(self.spectral, beta)
        table = np.zeros((4, 4))
        table[0, 0] = 1.0
        for a, b in ALL_PAIRS:
            table[_table_index(a, b)] = w @ self.eigen_diagonal(bond, a, b)
        return table

    def initial_state_eigenbasis(self, a_tilde: float, beta_tilde: float) -> np.ndarray:
        """Thermal state of the pre-quench Hamiltonian, in the zero-field eigenbasis."""
        J = self.params.coupling_J
        H0 = build_hamiltonian(self.lattice, self.params, a_tilde * J)
        parity = parity_operator(self.n)
        odd = np.abs(H0[np.not_equal.outer(parity, parity)]).max(initial=0.0)
        if odd > 1e-12:
            raise AssertionError("pre-quench Hamiltonian breaks the global phase flip")
        s0 = spectral_decompose(H0)
        del H0
        w = thermal_weights(s0, beta_tilde / J)
        V0 = s0.vectors
        V = self.spectral.vectors
        X = V.conj().T @ V0  # overlaps <n|k0>
        del s0, V0
        r = (X * w) @ X.conj().T
        return 0.5 * (r + r.conj().T)

    # -- quench ------------------------------------------------------------
    def bond_series(self, bond, r: np.ndarray, times: np.ndarray | None) -> BondSeries:
        """Diagonal-ensemble and time-sampled Pauli tables of ``bond`` for initial state ``r``."""
        return self.bond_series_many(bond, [r], times)[0]

    def bond_series_many(self, bond, rs: list[np.ndarray], times: np.ndarray | None) -> list[BondSeries]:
        blocks = self.spectral.degenerate_blocks()
        E = self.spectral.energies
        n_t = 0 if times is None else len(times)
        diag = [np.zeros((4, 4)) for _ in rs]
        samples = [np.zeros((n_t, 4, 4)) for _ in rs]
        for d, s in zip(diag, samples):
            d[0, 0] = 1.0
            s[:, 0, 0] = 1.0
        for a, b in PARITY_EVEN:
            O = self.eigen_matrix(bond, a, b)
            idx = _table_index(a, b)
            for k, r in enumerate(rs):
                W = r * O.T
                diag[k][idx] = sum(np.real(np.sum(W[blk, blk])) for blk in blocks)
                if n_t:
                    samples[k][:, idx[0], idx[1]] = _quadratic_form_series(W, E, times)
                del W
            del O
        return [BondSeries(d, s) for d, s in zip(diag, samples)]


def _quadratic_form_series(W: np.ndarray, E: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Re[p(t)^T W conj(p(t))] for p = exp(-iEt), chunked over times."""
    Wr = np.ascontiguousarray(W.real)
    Wi = np.ascontiguousarray(W.imag) if np.iscomplexobj(W) and np.any(W.imag) else None
    out = np.empty(len(times))
    for start in range(0, len(times), _CHUNK):
        t = times[start:start + _CHUNK]
        C = np.cos(np.outer(E, t))
        S = np.sin(np.outer(E, t))
        val = np.einsum("nt,nt->t", C, Wr @ C) + np.einsum("nt,nt->t", S, Wr @ S)
        if Wi is not None:
            val += np.einsum("nt,nt->t", S, Wi @ C) - np.einsum("nt,nt->t", C, Wi @ S)
        out[start:start + _CHUNK] = val
    return out


def sample_times(plan: SamplingPlan, coupling_J: float = 1.0) -> np.ndarray:
    """Sampling times in physical units; ``plan.t_max`` is measured in 1/J."""
    return plan.times() / abs(coupling_J)
