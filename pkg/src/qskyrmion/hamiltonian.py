"""XXZ + DMI + Zeeman Hamiltonian as a real-weighted sum of Pauli strings."""

from __future__ import annotations

import dataclasses
import functools
from dataclasses import dataclass
from typing import IO

import numpy as np

from .lattice import Lattice, LatticeSpec, assign_dmi, build_lattice

DENSE_CAP = 12
_DROP_TOL = 1e-15

class HamiltonianError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    j_par: float = -1.0
    j_perp: float = 0.5
    dmi_magnitude: float = 1.0
    dmi_mode: str = "parallel"
    b_z: float = 0.0

    def __post_init__(self):
        if not self.j_par < 0:
            raise HamiltonianError("j_par must be negative (ferromagnetic in-plane exchange)")
        if not self.j_perp > 0:
            raise HamiltonianError("j_perp must be positive")
        if self.dmi_magnitude < 0:
            raise HamiltonianError("dmi_magnitude must be non-negative")
        if self.dmi_mode not in ("parallel", "perpendicular"):
            raise HamiltonianError(f"unknown DMI mode {self.dmi_mode!r}")


@dataclass(frozen=True)
class PauliString:
    """``coefficient * prod(sigma^axis_site)``; factors sorted by site."""

    factors: tuple[tuple[int, str], ...]
    coefficient: float

    def __post_init__(self):
        sites = [s for s, _ in self.factors]
        if len(set(sites)) != len(sites):
            raise HamiltonianError("a Pauli string may act on each site at most once")
        if any(a not in "XYZ" or len(a) != 1 for _, a in self.factors):
            raise HamiltonianError("Pauli axes must be X, Y or Z")
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @classmethod
    def of(cls, coefficient: float, *factors: tuple[int, str]) -> "PauliString":
        return cls(tuple(factors), coefficient)

    def masks(self) -> tuple[int, int, int]:
        """(x_mask, z_mask, number of Y factors) for bit-level application."""
        x = z = ny = 0
        for site, axis in self.factors:
            bit = 1 << site
            if axis in "XY":
                x |= bit
            if axis in "YZ":
                z |= bit
            ny += axis == "Y"
        return x, z, ny


@dataclass(frozen=True)
class CompiledPauliSum:
    """Terms grouped by x-mask; ``coef`` already carries the ``i**ny`` phase."""

    group_x: np.ndarray
    group_ptr: np.ndarray
    zmask: np.ndarray
    coef: np.ndarray


@dataclass(frozen=True)
class PauliSum:
    terms: tuple[PauliString, ...]
    n_qubits: int

    def __post_init__(self):
        for t in self.terms:
            if any(s >= self.n_qubits or s < 0 for s, _ in t.factors):
                raise HamiltonianError(f"term {t} acts outside {self.n_qubits} qubits")

    def __len__(self):
        return len(self.terms)

    @property
    def is_real(self) -> bool:
        return all(np.isrealobj(t.coefficient) for t in self.terms)

    @functools.cached_property
    def compiled(self) -> CompiledPauliSum:
        by_x: dict[int, list[tuple[int, complex]]] = {}
        for t in self.terms:
            x, z, ny = t.masks()
            by_x.setdefault(x, []).append((z, t.coefficient * 1j**ny))
        group_x, ptr, zmask, coef = [], [0], [], []
        for x in sorted(by_x):
            group_x.append(x)
            for z, c in by_x[x]:
                zmask.append(z)
                coef.append(c)
            ptr.append(len(zmask))
        return CompiledPauliSum(
            np.array(group_x, dtype=np.uint64),
            np.array(ptr, dtype=np.int64),
            np.array(zmask, dtype=np.uint64),
            np.array(coef, dtype=np.complex128),
        )

    def to_text(self) -> str:
        lines = []
        for t in self.terms:
            ops = " ".join(f"{s}:{a}" for s, a in t.factors)
            lines.append(f"{t.coefficient!r} {ops}".rstrip())
        return "\n".join(lines) + "\n"

    def dump(self, fh: IO[str]) -> None:
        fh.write(self.to_text())


# Intra-bond term order: exchange XX, YY, ZZ, then DMI pairs for d_x, d_y, d_z.
def _bond_terms(i: int, j: int, d, j_par: float, j_perp: float):
    dx, dy, dz = d
    yield j_par, "X", "X"
    yield j_par, "Y", "Y"
    yield j_perp, "Z", "Z"
    yield dx, "Y", "Z"
    yield -dx, "Z", "Y"
    yield dy, "Z", "X"
    yield -dy, "X", "Z"
    yield dz, "X", "Y"
    yield -dz, "Y", "X"


def build_hamiltonian(lattice: Lattice, params: ModelParams) -> PauliSum:
    """Assemble J||(XX+YY) + J_perp ZZ + D.(s_i x s_j) per bond plus b_z Z per site."""
    if lattice.dmi_mode is None and params.dmi_magnitude > 0:
        raise HamiltonianError("lattice has no DMI vectors assigned")
    if lattice.dmi_mode is not None and lattice.dmi_mode != params.dmi_mode:
        raise HamiltonianError(
            f"lattice DMI mode {lattice.dmi_mode!r} does not match params {params.dmi_mode!r}"
        )
    terms = []
    for b in lattice.bonds:
        for c, ai, aj in _bond_terms(b.i, b.j, b.d, params.j_par, params.j_perp):
            if abs(c) > _DROP_TOL:
                terms.append(PauliString(((b.i, ai), (b.j, aj)), float(c)))
    if abs(params.b_z) > _DROP_TOL:
        terms.extend(PauliString(((s, "Z"),), float(params.b_z)) for s in range(lattice.n_sites))
    return PauliSum(tuple(terms), lattice.n_sites)


def model_hamiltonian(spec: LatticeSpec, params: ModelParams) -> tuple[Lattice, PauliSum]:
    lattice = assign_dmi(build_lattice(spec), params.dmi_mode, params.dmi_magnitude)
    return lattice, build_hamiltonian(lattice, params)


def with_field(params: ModelParams, b_z: float) -> ModelParams:
    return dataclasses.replace(params, b_z=float(b_z))


def dense_matrix(pauli_sum: PauliSum, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense 2**n x 2**n matrix; qubit 0 is the least-significant bit."""
    n = pauli_sum.n_qubits
    if n > cap:
        raise HamiltonianError(f"dense matrix for {n} qubits exceeds cap {cap}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for t in pauli_sum.terms:
        x, z, ny = t.masks()
        sign = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
        mat[idx ^ x, idx] += t.coefficient * (1j**ny) * sign
    return mat
