"""Per-site magnetization and the triangle-interpolated topological charge."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .lattice import Lattice, Triangle, triangulate
from .simulator import StateVector, pauli_overlap


class ObservableError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MagnetizationField:
    """``m[i] = (<X_i>, <Y_i>, <Z_i>)`` at ``positions[i]``."""

    positions: np.ndarray
    m: np.ndarray

    @property
    def n_sites(self) -> int:
        return len(self.m)

    def normalized(self) -> "MagnetizationField":
        norms = np.linalg.norm(self.m, axis=1, keepdims=True)
        return MagnetizationField(self.positions, np.divide(self.m, norms, out=np.zeros_like(self.m), where=norms > 0))


@dataclass(frozen=True)
class TriangleCoefficients:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def magnetization_field(state: StateVector, lattice: Lattice) -> MagnetizationField:
    if state.n_qubits != lattice.n_sites:
        raise ObservableError(
            f"state has {state.n_qubits} qubits but the lattice has {lattice.n_sites} sites"
        )
    psi = state.amplitudes
    m = np.empty((lattice.n_sites, 3))
    for i in range(lattice.n_sites):
        bit = 1 << i
        m[i, 0] = pauli_overlap(psi, psi, bit, 0).real
        # Y = i X Z
        m[i, 1] = (1j * pauli_overlap(psi, psi, bit, bit)).real
        m[i, 2] = pauli_overlap(psi, psi, 0, bit).real
    return MagnetizationField(lattice.positions.copy(), m)


def total_magnetization(field: MagnetizationField) -> np.ndarray:
    return field.m.sum(axis=0)


def triangle_coefficients(
    triangle: Triangle, field: MagnetizationField, positions: np.ndarray | None = None
) -> TriangleCoefficients:
    """Linear interpolant ``m(x, y) = a x + b y + c`` through the three vertices."""
    pos = field.positions if positions is None else np.asarray(positions, dtype=float)
    idx = list(triangle.vertices)
    p = pos[idx]
    A = np.column_stack([p, np.ones(3)])
    if abs(np.linalg.det(A)) < 1e-14:
        raise ObservableError(f"degenerate triangle {triangle.vertices}")
    a, b, c = np.linalg.solve(A, field.m[idx])
    return TriangleCoefficients(a, b, c)


def _contribution(p: np.ndarray, m: np.ndarray) -> float:
    # local frame with the first vertex at the origin: c = m0
    d = p[1:] - p[0]
    area2 = d[0, 0] * d[1, 1] - d[0, 1] * d[1, 0]
    if abs(area2) < 1e-14:
        raise ObservableError("degenerate triangle")
    dm = m[1:] - m[0]
    # solve [[dx1, dy1], [dx2, dy2]] [a; b] = [dm1; dm2] by Cramer's rule
    a = (d[1, 1] * dm[0] - d[0, 1] * dm[1]) / area2
    b = (d[0, 0] * dm[1] - d[1, 0] * dm[0]) / area2
    return 0.5 * area2 * float(np.dot(np.cross(a, b), m[0]))


def triangle_charges(lattice: Lattice, field: MagnetizationField, normalize: bool = False) -> np.ndarray:
    """Per-triangle contributions ``S_t (a_t x b_t) . c_t / 4 pi`` in triangulation order."""
    if field.n_sites != lattice.n_sites:
        raise ObservableError("field and lattice sizes differ")
    if normalize:
        field = field.normalized()
    pos = field.positions
    out = []
    for t in triangulate(lattice):
        idx = list(t.vertices)
        out.append(_contribution(pos[idx], field.m[idx]) / (4 * math.pi))
    return np.array(out)


def topological_charge(lattice: Lattice, field: MagnetizationField, normalize: bool = False) -> float:
    return float(math.fsum(triangle_charges(lattice, field, normalize)))


def dump_field(field: MagnetizationField, fh: IO[str]) -> None:
    """Write "index x y mx my mz" per site."""
    for k, ((x, y), (mx, my, mz)) in enumerate(zip(field.positions.tolist(), field.m.tolist())):
        fh.write(f"{k} {x!r} {y!r} {mx!r} {my!r} {mz!r}\n")


def load_field(fh: IO[str]) -> MagnetizationField:
    rows = np.array([[float(v) for v in line.split()[1:]] for line in fh if line.strip()])
    return MagnetizationField(rows[:, :2], rows[:, 2:])
