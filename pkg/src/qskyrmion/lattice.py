"""Site geometry, nearest-neighbour bonds, DMI vectors and triangulation.

Square lattices are indexed row-major (``index = ix + iy * nx``). Triangular
lattices are centred hexagonal clusters with ``3 s (s + 1) + 1`` sites,
indexed bottom-to-top, left-to-right. Lattice spacing is 1 throughout and
boundaries are open.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

#: Default upper bound on the number of sites (= qubits).
MAX_SITES = 26

_SQRT3_2 = math.sqrt(3.0) / 2.0


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    kind: str = "square"
    nx: int = 4
    ny: int = 4
    shells: int = 1

    def __post_init__(self):
        if self.kind not in ("square", "triangular"):
            raise LatticeError(f"unknown lattice kind {self.kind!r}")
        if self.kind == "square" and (self.nx < 1 or self.ny < 1):
            raise LatticeError("square lattice needs nx, ny >= 1")
        if self.kind == "triangular" and self.shells < 0:
            raise LatticeError("triangular lattice needs shells >= 0")

    @property
    def n_sites(self) -> int:
        if self.kind == "square":
            return self.nx * self.ny
        return 3 * self.shells * (self.shells + 1) + 1

    def to_dict(self) -> dict:
        if self.kind == "square":
            return {"kind": "square", "nx": self.nx, "ny": self.ny}
        return {"kind": "triangular", "shells": self.shells}

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSpec":
        kind = d.get("kind", "square")
        if kind == "square":
            return cls(kind, int(d["nx"]), int(d["ny"]))
        return cls(kind, shells=int(d["shells"]))


@dataclass(frozen=True)
class Bond:
    """Nearest-neighbour pair stored once with ``i < j``.

    ``r`` is the in-plane unit vector from ``i`` to ``j``; ``d`` the DMI vector.
    """

    i: int
    j: int
    r: tuple[float, float]
    d: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Triangle:
    vertices: tuple[int, int, int]
    signed_area: float


@dataclass(frozen=True, eq=False)
class Lattice:
    spec: LatticeSpec
    positions: np.ndarray
    bonds: tuple[Bond, ...]
    dmi_mode: str | None = None
    dmi_magnitude: float = 0.0

    @property
    def n_sites(self) -> int:
        return len(self.positions)


def _square_positions(nx: int, ny: int) -> np.ndarray:
    iy, ix = np.divmod(np.arange(nx * ny), nx)
    return np.column_stack([ix, iy]).astype(float)


def _hex_axial(shells: int) -> list[tuple[int, int]]:
    # axial (a, b) -> position a*(1, 0) + b*(1/2, sqrt(3)/2)
    cells = [
        (a, b)
        for b in range(-shells, shells + 1)
        for a in range(-shells, shells + 1)
        if max(abs(a), abs(b), abs(a + b)) <= shells
    ]
    # rows are fixed b; within a row a increases with x
    return sorted(cells, key=lambda ab: (ab[1], ab[0]))


def _axial_to_xy(a: int, b: int) -> tuple[float, float]:
    return a + 0.5 * b, _SQRT3_2 * b


def build_lattice(spec: LatticeSpec, max_sites: int = MAX_SITES) -> Lattice:
    """Enumerate sites and open-boundary nearest-neighbour bonds."""
    n = spec.n_sites
    if n == 0:
        raise LatticeError("lattice has no sites")
    if n > max_sites:
        raise LatticeError(f"{n} sites exceeds the configured maximum of {max_sites}")

    if spec.kind == "square":
        pos = _square_positions(spec.nx, spec.ny)
        pairs = []
        for iy in range(spec.ny):
            for ix in range(spec.nx):
                s = ix + iy * spec.nx
                if ix + 1 < spec.nx:
                    pairs.append((s, s + 1))
                if iy + 1 < spec.ny:
                    pairs.append((s, s + spec.nx))
    else:
        axial = _hex_axial(spec.shells)
        index = {ab: k for k, ab in enumerate(axial)}
        pos = np.array([_axial_to_xy(*ab) for ab in axial])
        pairs = []
        for (a, b), s in index.items():
            for da, db in ((1, 0), (0, 1), (-1, 1)):
                t = index.get((a + da, b + db))
                if t is not None:
                    pairs.append((min(s, t), max(s, t)))

    bonds = []
    for i, j in sorted(pairs):
        dx, dy = pos[j] - pos[i]
        norm = math.hypot(dx, dy)
        bonds.append(Bond(i, j, (float(dx / norm), float(dy / norm))))
    return Lattice(spec, pos, tuple(bonds))


def dmi_vector(r: tuple[float, float], mode: str, magnitude: float) -> tuple[float, float, float]:
    rx, ry = float(r[0]), float(r[1])
    magnitude = float(magnitude)
    if mode == "parallel":
        return (magnitude * rx, magnitude * ry, 0.0)
    if mode == "perpendicular":
        # z-hat cross r: r rotated by +90 degrees in-plane
        return (-magnitude * ry, magnitude * rx, 0.0)
    raise LatticeError(f"unknown DMI mode {mode!r}")


def assign_dmi(lattice: Lattice, mode: str, magnitude: float) -> Lattice:
    """Return a copy of ``lattice`` with DMI vectors set on every bond."""
    if magnitude < 0:
        raise LatticeError("DMI magnitude must be non-negative")
    bonds = tuple(dataclasses.replace(b, d=dmi_vector(b.r, mode, magnitude)) for b in lattice.bonds)
    return dataclasses.replace(lattice, bonds=bonds, dmi_mode=mode, dmi_magnitude=float(magnitude))


def _signed_area(pos: np.ndarray, i: int, j: int, k: int) -> float:
    (x0, y0), (x1, y1), (x2, y2) = pos[i], pos[j], pos[k]
    return 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


def _oriented(pos: np.ndarray, tri: Iterable[int]) -> Triangle:
    i, j, k = tri
    area = _signed_area(pos, i, j, k)
    if area < 0:
        j, k = k, j
        area = -area
    return Triangle((i, j, k), area)


def triangulate(lattice: Lattice) -> list[Triangle]:
    """Counter-clockwise triangles covering the lattice's convex interior.

    Square cells are split along the lower-left to upper-right diagonal;
    triangular clusters use their elementary up/down triangles.
    """
    if lattice.n_sites < 3:
        raise LatticeError("triangulation needs at least 3 sites")
    spec, pos = lattice.spec, lattice.positions
    tris = []
    if spec.kind == "square":
        nx = spec.nx
        for iy in range(spec.ny - 1):
            for ix in range(nx - 1):
                a = ix + iy * nx
                tris.append(_oriented(pos, (a, a + 1, a + nx + 1)))
                tris.append(_oriented(pos, (a, a + nx + 1, a + nx)))
    else:
        axial = _hex_axial(spec.shells)
        index = {ab: k for k, ab in enumerate(axial)}
        for (a, b), s in index.items():
            up = (index.get((a + 1, b)), index.get((a, b + 1)))
            down = (index.get((a + 1, b - 1)), index.get((a + 1, b)))
            for p, q in (up, down):
                if p is not None and q is not None:
                    tris.append(_oriented(pos, (s, p, q)))
    return tris


def dump_lattice(lattice: Lattice, fh: IO[str]) -> None:
    """Write "index x y" lines followed by "i j dx dy dz" bond lines."""
    for k, (x, y) in enumerate(lattice.positions.tolist()):
        fh.write(f"{k} {x!r} {y!r}\n")
    for b in lattice.bonds:
        fh.write(f"{b.i} {b.j} {b.d[0]!r} {b.d[1]!r} {b.d[2]!r}\n")
