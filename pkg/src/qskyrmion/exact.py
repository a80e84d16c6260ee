"""Exact ground states: thick-restart Lanczos on the matrix-free matvec,
and dense diagonalisation for small systems."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .hamiltonian import DENSE_CAP, PauliSum, dense_matrix
from .simulator import MAX_QUBITS, StateVector, matvec

DEGENERACY_TOL = 1e-6


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, best_residual: float, best: "GroundState | None" = None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best = best


@dataclass(frozen=True)
class LanczosConfig:
    max_krylov: int = 60
    residual_tol: float | None = None
    reorthogonalize: bool = True
    rng_seed: int = 0
    max_restarts: int = 200
    keep: int | None = None

    def __post_init__(self):
        if self.max_krylov < 2:
            raise ValueError("max_krylov must be >= 2")
        if self.residual_tol is not None and not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")

    def tolerance(self, energy: float) -> float:
        if self.residual_tol is not None:
            return self.residual_tol
        return 1e-10 * max(1.0, abs(energy))


@dataclass(eq=False)
class GroundState:
    energy: float
    vector: StateVector
    residual: float
    gap_estimate: float
    near_degenerate: bool
    ritz_trace: list[float] = field(default_factory=list)
    matvecs: int = 0
    basis_overlap: float = 0.0


def _start_vector(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _orthogonalize(V: np.ndarray, lo: int, m: int, w: np.ndarray, passes: int) -> np.ndarray:
    """Remove from ``w`` its components on ``V[lo:m]``; return the coefficients."""
    h = np.zeros(m, dtype=complex)
    for _ in range(passes):
        c = (V[lo:m] @ w.conj()).conj()
        w -= c @ V[lo:m]
        h[lo:m] += c
    return h


def lanczos_ground(pauli_sum: PauliSum, config: LanczosConfig = LanczosConfig()) -> GroundState:
    """Lowest eigenpair of ``pauli_sum`` by thick-restart Lanczos.

    The projected matrix ``T = V^H H V`` is kept dense. After a restart it
    starts as the diagonal of the retained Ritz values; their couplings to
    the carried-over residual direction are recovered when that direction
    is expanded.
    """
    n = pauli_sum.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds resource cap {MAX_QUBITS}")
    dim = 1 << n
    mk = min(config.max_krylov, dim)
    keep = config.keep if config.keep is not None else max(1, min(mk // 3, 10))
    keep = min(keep, mk - 1)
    full = config.reorthogonalize

    V = np.zeros((mk, dim), dtype=complex)
    T = np.zeros((mk, mk), dtype=complex)
    V[0] = _start_vector(dim, config.rng_seed)
    w = np.empty(dim, dtype=complex)
    trace: list[float] = []
    matvecs = 0
    m = 0
    kept = 0
    best: GroundState | None = None

    for _ in range(config.max_restarts + 1):
        while m < mk:
            matvec(pauli_sum, V[m], out=w)
            matvecs += 1
            if full:
                h = _orthogonalize(V, 0, m + 1, w, 2)
            else:
                # the first vector after a restart couples to every kept Ritz vector
                lo = 0 if m == kept else max(0, m - 1)
                h = _orthogonalize(V, lo, m + 1, w, 1)
            T[: m + 1, m] = h
            T[m, : m + 1] = h.conj()
            T[m, m] = h[m].real
            beta = float(np.linalg.norm(w))
            m += 1

            theta, S = np.linalg.eigh(T[:m, :m])
            trace.append(float(theta[0]))
            tol = config.tolerance(theta[0])
            exhausted = beta <= 1e-14 * max(1.0, abs(theta[0])) or m == dim
            if beta * abs(S[m - 1, 0]) <= 0.1 * tol or exhausted:
                gs = _finish(pauli_sum, V[:m], theta, S, trace, matvecs)
                if best is None or gs.residual < best.residual:
                    best = gs
                if gs.residual <= config.tolerance(gs.energy) or exhausted:
                    return gs
            if m < mk:
                V[m] = w / beta
        theta, S = np.linalg.eigh(T[:m, :m])
        V[:keep] = S[:, :keep].T @ V[:m]
        V[keep] = w / beta
        T[:] = 0
        T[np.arange(keep), np.arange(keep)] = theta[:keep]
        m = kept = keep

    if best is None:
        best = _finish(pauli_sum, V[:m], *np.linalg.eigh(T[:m, :m]), trace, matvecs)
    raise ConvergenceError(
        f"Lanczos did not converge after {config.max_restarts} restarts "
        f"(best residual {best.residual:.3e})",
        best.residual,
        best,
    )


def _finish(pauli_sum, V, theta, S, trace, matvecs) -> GroundState:
    v = S[:, 0] @ V
    v /= np.linalg.norm(v)
    hv = matvec(pauli_sum, v)
    e = float(np.vdot(v, hv).real)
    residual = float(np.linalg.norm(hv - e * v))
    gap = float(theta[1] - theta[0]) if len(theta) > 1 else np.inf
    gram = V @ V.conj().T
    overlap = float(np.abs(gram - np.eye(len(V))).max()) if len(V) > 1 else 0.0
    return GroundState(
        energy=e,
        vector=StateVector(v, pauli_sum.n_qubits),
        residual=residual,
        gap_estimate=max(gap, 0.0),
        near_degenerate=bool(gap < DEGENERACY_TOL),
        ritz_trace=list(trace),
        matvecs=matvecs,
        basis_overlap=overlap,
    )


def dense_spectrum(pauli_sum: PauliSum, cap: int = DENSE_CAP) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(dense_matrix(pauli_sum, cap))


def dense_ground(pauli_sum: PauliSum, cap: int = DENSE_CAP) -> GroundState:
    """Lowest eigenpair (and the next eigenvalue, for the gap) of the dense matrix."""
    mat = dense_matrix(pauli_sum, cap)
    w, U = linalg.eigh(mat, subset_by_index=[0, min(1, len(mat) - 1)])
    v = np.ascontiguousarray(U[:, 0])
    e = float(w[0])
    gap = float(w[1] - w[0]) if len(w) > 1 else np.inf
    return GroundState(
        energy=e,
        vector=StateVector(v, pauli_sum.n_qubits),
        residual=float(np.linalg.norm(mat @ v - e * v)),
        gap_estimate=gap,
        near_degenerate=bool(gap < DEGENERACY_TOL),
    )
