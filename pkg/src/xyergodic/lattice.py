"""Periodic lattices and the transverse-field XY Hamiltonian.

Basis convention: site 0 is the most significant bit of a basis index and
bit value 0 is spin up (sigma^z = +1). This matches ``np.kron`` ordering, so
``rho.reshape((2,) * 2 * n)`` exposes site ``k`` on axes ``k`` and ``n + k``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

MAX_SITES = 14


class LatticeKind(str, enum.Enum):
    CHAIN = "chain"
    LADDER = "ladder"
    TORUS = "torus"


@dataclass(frozen=True)
class Lattice:
    """Sites plus deduplicated nearest-neighbour bonds.

    ``bond_types`` labels every bond ("bond" for chains, "rail"/"rung" for
    ladders, "row"/"column" for tori) so that bond-resolved quantities can
    be reported separately.
    """

    kind: LatticeKind
    n_sites: int
    bonds: tuple[tuple[int, int], ...]
    dimensions: tuple[int, ...]
    bond_types: tuple[str, ...] = field(default=())

    @property
    def label(self) -> str:
        if self.kind is LatticeKind.CHAIN:
            return f"chain{self.n_sites}"
        return f"{self.kind.value}{'x'.join(map(str, self.dimensions))}"

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n_sites, dtype=int)
        for i, j in self.bonds:
            deg[i] += 1
            deg[j] += 1
        return deg

    def is_bond(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.bonds

    def representative_bonds(self) -> dict[str, tuple[int, int]]:
        """First bond of each type, in order of appearance."""
        reps: dict[str, tuple[int, int]] = {}
        for b, t in zip(self.bonds, self.bond_types):
            reps.setdefault(t, b)
        return reps

    def bond_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for t in self.bond_types:
            counts[t] = counts.get(t, 0) + 1
        return counts

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "dimensions": list(self.dimensions),
            "n_sites": self.n_sites,
            "site_order": _SITE_ORDER[self.kind],
            "bonds": [list(b) for b in self.bonds],
            "bond_types": list(self.bond_types),
        }


_SITE_ORDER = {
    LatticeKind.CHAIN: "sequential around the ring",
    LatticeKind.LADDER: "rail-major: site = rail * L + position",
    LatticeKind.TORUS: "row-major: site = row * cols + col",
}


@dataclass(frozen=True)
class ModelParams:
    """Coupling ``J``, anisotropy ``gamma`` and the initial (pre-quench) field ``a``."""

    coupling_J: float = 1.0
    gamma: float = 0.5
    field_a: float = 0.0

    def __post_init__(self):
        if self.coupling_J == 0:
            raise ValueError("coupling_J must be nonzero")
        if self.gamma == 0:
            raise ValueError("gamma must be nonzero: field and interaction would commute")

    @property
    def a_tilde(self) -> float:
        return self.field_a / self.coupling_J

    def beta_tilde(self, beta: float) -> float:
        return beta * self.coupling_J


def _add_bond(bonds: dict, i: int, j: int, kind: str) -> None:
    key = (min(i, j), max(i, j))
    if i == j:
        raise ValueError(f"self-bond on site {i}")
    bonds.setdefault(key, kind)


def build_lattice(kind: LatticeKind | str, dimensions) -> Lattice:
    """Build a periodic chain ``(N,)``, ladder ``(L,)`` / ``(2, L)`` or torus ``(R, C)``.

    Extents below 3 along a periodic direction are rejected: the wrap-around
    bond would coincide with a direct bond.
    """
    kind = LatticeKind(kind)
    dims = (dimensions,) if isinstance(dimensions, (int, np.integer)) else tuple(int(d) for d in dimensions)
    bonds: dict[tuple[int, int], str] = {}

    if kind is LatticeKind.CHAIN:
        if len(dims) != 1:
            raise ValueError(f"chain takes one dimension, got {dims}")
        (n,) = dims
        if n < 3:
            raise ValueError(f"chain needs N >= 3 (N={n} duplicates the wrap-around bond)")
        for i in range(n):
            _add_bond(bonds, i, (i + 1) % n, "bond")
        n_sites = n
    elif kind is LatticeKind.LADDER:
        if len(dims) == 2 and dims[0] == 2:
            dims = (dims[1],)
        if len(dims) != 1:
            raise ValueError(f"ladder takes (L,) or (2, L), got {dimensions}")
        (length,) = dims
        if length < 3:
            raise ValueError(f"ladder needs L >= 3 (L={length} duplicates the rail wrap-around bond)")
        for rail in range(2):
            for c in range(length):
                _add_bond(bonds, rail * length + c, rail * length + (c + 1) % length, "rail")
        for c in range(length):
            _add_bond(bonds, c, length + c, "rung")
        dims = (2, length)
        n_sites = 2 * length
    else:
        if len(dims) != 2:
            raise ValueError(f"torus takes (rows, cols), got {dims}")
        rows, cols = dims
        if rows < 3 or cols < 3:
            raise ValueError(f"torus needs rows, cols >= 3, got {rows}x{cols} (wrap-around bonds would duplicate)")
        for r in range(rows):
            for c in range(cols):
                _add_bond(bonds, r * cols + c, r * cols + (c + 1) % cols, "row")
        for r in range(rows):
            for c in range(cols):
                _add_bond(bonds, r * cols + c, ((r + 1) % rows) * cols + c, "column")
        n_sites = rows * cols

    return Lattice(
        kind=kind,
        n_sites=n_sites,
        bonds=tuple(bonds),
        dimensions=dims,
        bond_types=tuple(bonds.values()),
    )


def basis_bits(n_sites: int) -> np.ndarray:
    """``bits[k, s]`` is the occupation (0 = up) of site ``k`` in basis state ``s``."""
    s = np.arange(2**n_sites)
    shifts = n_sites - 1 - np.arange(n_sites)
    return ((s[None, :] >> shifts[:, None]) & 1).astype(np.int8)


def pauli_action(n_sites: int, ops: Mapping[int, str]) -> tuple[np.ndarray, np.ndarray]:
    """Pauli string as a signed permutation.

    Returns ``(target, phase)`` with ``P |s> = phase[s] |target[s]>``; the
    dense matrix has ``P[target[s], s] = phase[s]``.
    """
    dim = 2**n_sites
    s = np.arange(dim)
    target = s.copy()
    phase = np.ones(dim, dtype=complex)
    for site, label in ops.items():
        if not 0 <= site < n_sites:
            raise ValueError(f"site {site} outside [0, {n_sites})")
        mask = 1 << (n_sites - 1 - site)
        bit = (s & mask) != 0
        if label == "x":
            target ^= mask
        elif label == "y":
            target ^= mask
            phase *= np.where(bit, -1j, 1j)
        elif label == "z":
            phase *= np.where(bit, -1.0, 1.0)
        elif label != "i":
            raise ValueError(f"unknown Pauli label {label!r}")
    return target, phase


def pauli_operator(n_sites: int, ops: Mapping[int, str]) -> np.ndarray:
    """Dense Pauli string; intended for small systems and tests."""
    target, phase = pauli_action(n_sites, ops)
    dim = 2**n_sites
    out = np.zeros((dim, dim), dtype=complex)
    out[target, np.arange(dim)] = phase
    return out


def parity_operator(n_sites: int) -> np.ndarray:
    """Diagonal of the global phase flip prod_i sigma^z_i."""
    return np.where(basis_bits(n_sites).sum(axis=0) % 2 == 0, 1.0, -1.0)


def build_hamiltonian(lattice: Lattice, params: ModelParams, field_h: float, max_sites: int = MAX_SITES) -> np.ndarray:
    """Dense XY Hamiltonian with spin-1/2 operators S = sigma/2.

    H = J sum_<ij> [(1+g) Sx Sx + (1-g) Sy Sy] - h sum_i Sz.

    The matrix is real symmetric in the computational basis and is returned
    as float64.
    """
    n = lattice.n_sites
    if n > max_sites:
        raise ValueError(f"{n} sites exceeds the dense-matrix cap of {max_sites} sites")
    dim = 2**n
    bits = basis_bits(n)
    s = np.arange(dim)
    H = np.zeros((dim, dim))
    sz_total = 0.5 * (n - 2 * bits.sum(axis=0, dtype=np.int64))
    H[s, s] = -field_h * sz_total

    J, g = params.coupling_J, params.gamma
    for i, j in lattice.bonds:
        flipped = s ^ (1 << (n - 1 - i)) ^ (1 << (n - 1 - j))
        aligned = bits[i] == bits[j]
        # SxSx -> +1/4, SySy -> -1/4 on aligned pairs, +1/4 on anti-aligned
        amp = 0.25 * J * ((1 + g) + (1 - g) * np.where(aligned, -1.0, 1.0))
        H[flipped, s] += amp
    return H
