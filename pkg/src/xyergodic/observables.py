"""Reduced states, Pauli correlators and logarithmic negativity."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PSD_FLOOR = -1e-9


class UnphysicalStateError(ValueError):
    """Correlators do not describe a positive semidefinite two-site state."""


@dataclass(frozen=True)
class CorrelatorSet:
    """Pauli-normalized magnetization and nearest-neighbour correlators."""

    m_z: float
    t_xx: float
    t_yy: float
    t_zz: float
    t_xy: float = 0.0
    t_yx: float = 0.0
    t_xz: float = 0.0
    t_yz: float = 0.0

    def off_diagonal_max(self) -> float:
        return max(abs(self.t_xy), abs(self.t_yx), abs(self.t_xz), abs(self.t_yz))

    def get(self, quantity: str) -> float:
        return float(getattr(self, quantity))

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class EntanglementValue:
    e_n: float
    negativity: float

    def to_dict(self) -> dict:
        return asdict(self)


def partial_trace(rho: np.ndarray, keep_sites: Sequence[int], n_sites: int | None = None) -> np.ndarray:
    """Reduce a qubit-register state to ``keep_sites`` (output ordered as given)."""
    keep = list(keep_sites)
    if not keep:
        raise ValueError("keep_sites must not be empty")
    if n_sites is None:
        n_sites = int(round(np.log2(rho.shape[0])))
    if rho.shape != (2**n_sites, 2**n_sites):
        raise ValueError(f"state shape {rho.shape} is not that of {n_sites} qubits")
    if len(set(keep)) != len(keep) or any(not 0 <= k < n_sites for k in keep):
        raise ValueError(f"invalid keep_sites {keep} for {n_sites} sites")
    traced = [k for k in range(n_sites) if k not in keep]
    t = rho.reshape((2,) * (2 * n_sites))
    # move kept row axes, then kept column axes, to the front; traced pairs to the back
    order = keep + [n_sites + k for k in keep] + traced + [n_sites + k for k in traced]
    t = np.transpose(t, order)
    d_keep, d_tr = 2 ** len(keep), 2 ** len(traced)
    t = t.reshape(d_keep, d_keep, d_tr, d_tr)
    return np.trace(t, axis1=2, axis2=3)


def _pauli_pair(a: str, b: str) -> np.ndarray:
    return np.kron(PAULI[a], PAULI[b])


def pauli_expectations(rho2: np.ndarray) -> np.ndarray:
    """4x4 table ``T[a, b] = tr(rho2 sigma_a (x) sigma_b)`` over labels i, x, y, z."""
    labels = "ixyz"
    out = np.empty((4, 4))
    for ia, a in enumerate(labels):
        for ib, b in enumerate(labels):
            out[ia, ib] = np.real(np.trace(rho2 @ _pauli_pair(a, b)))
    return out


def two_site_from_paulis(table: np.ndarray) -> np.ndarray:
    labels = "ixyz"
    rho = np.zeros((4, 4), dtype=complex)
    for ia, a in enumerate(labels):
        for ib, b in enumerate(labels):
            rho += table[ia, ib] * _pauli_pair(a, b)
    return rho / 4


def correlators_from_two_site(rho2: np.ndarray) -> CorrelatorSet:
    return correlators_from_table(pauli_expectations(rho2))


def correlators_from_table(T: np.ndarray) -> CorrelatorSet:
    i, x, y, z = range(4)
    return CorrelatorSet(
        m_z=0.5 * (T[z, i] + T[i, z]),
        t_xx=T[x, x], t_yy=T[y, y], t_zz=T[z, z],
        t_xy=T[x, y], t_yx=T[y, x], t_xz=T[x, z], t_yz=T[y, z],
    )


def correlators(rho_full: np.ndarray, site_pair: tuple[int, int], lattice=None) -> CorrelatorSet:
    """Correlators of a nearest-neighbour pair; ``lattice`` (if given) enforces adjacency.

    ``m_z`` is the mean of the two single-site magnetizations, which coincide
    for translation-invariant states.
    """
    i, j = site_pair
    if lattice is not None and not lattice.is_bond(i, j):
        raise ValueError(f"sites {site_pair} are not nearest neighbours")
    return correlators_from_two_site(partial_trace(rho_full, [i, j]))


def _clip_psd(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    if w[0] < PSD_FLOOR:
        raise UnphysicalStateError(f"two-site state has eigenvalue {w[0]:.3e} < {PSD_FLOOR:g}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        rho = (v * w) @ v.conj().T
    return rho


def state_from_table(table: np.ndarray) -> np.ndarray:
    """Physical two-site state from a full Pauli table (PSD-checked)."""
    return _clip_psd(two_site_from_paulis(table))


def two_site_from_correlators(cs: CorrelatorSet) -> np.ndarray:
    """Two-site state from the symmetric-sector correlators (off-diagonals included if present)."""
    table = np.zeros((4, 4))
    i, x, y, z = range(4)
    table[i, i] = 1.0
    table[z, i] = table[i, z] = cs.m_z
    table[x, x], table[y, y], table[z, z] = cs.t_xx, cs.t_yy, cs.t_zz
    table[x, y], table[y, x] = cs.t_xy, cs.t_yx
    table[x, z], table[z, x] = cs.t_xz, cs.t_xz
    table[y, z], table[z, y] = cs.t_yz, cs.t_yz
    return _clip_psd(two_site_from_paulis(table))


def partial_transpose(rho2: np.ndarray) -> np.ndarray:
    """Transpose over the first qubit."""
    return rho2.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)


def logarithmic_negativity(rho2: np.ndarray) -> EntanglementValue:
    if rho2.shape != (4, 4):
        raise ValueError(f"expected a two-qubit state, got shape {rho2.shape}")
    pt = partial_transpose(rho2)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    neg = ev[ev < 0]
    # two-qubit partial transposes have at most one negative eigenvalue
    if len(neg) > 1 and neg[-1] < -1e-10:
        raise AssertionError(f"partial transpose has {len(neg)} negative eigenvalues: {ev}")
    negativity = float(-neg.sum()) if len(neg) else 0.0
    if negativity < 1e-15:
        negativity = 0.0
    return EntanglementValue(e_n=float(np.log2(2 * negativity + 1)), negativity=negativity)
