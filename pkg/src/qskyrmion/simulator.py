"""Statevector backend: gates, Pauli-sum expectations and matrix-free matvec.

Amplitudes are complex128 with qubit 0 as the least-significant bit of the
basis index. Gates update the amplitude array in place.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from . import kernels
from .hamiltonian import PauliSum

MAX_QUBITS = 26


class SimulatorError(ValueError):
    pass


class StateVector:
    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes: np.ndarray, n_qubits: int | None = None):
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if n_qubits is None:
            n_qubits = int(amplitudes.shape[0]).bit_length() - 1
        if amplitudes.shape != (1 << n_qubits,):
            raise SimulatorError(f"expected {1 << n_qubits} amplitudes, got {amplitudes.shape}")
        self.amplitudes = amplitudes
        self.n_qubits = n_qubits

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"


def _check_qubits(n: int, cap: int = MAX_QUBITS):
    if n < 1:
        raise SimulatorError("need at least one qubit")
    if n > cap:
        raise SimulatorError(f"{n} qubits exceeds resource cap {cap}")


def zero_state(n: int, cap: int = MAX_QUBITS) -> StateVector:
    _check_qubits(n, cap)
    amp = np.zeros(1 << n, dtype=np.complex128)
    amp[0] = 1.0
    return StateVector(amp, n)


def _target(state: StateVector, q: int):
    if not 0 <= q < state.n_qubits:
        raise SimulatorError(f"qubit {q} out of range for {state.n_qubits} qubits")


def apply_unitary_1q(state: StateVector, q: int, u: np.ndarray) -> StateVector:
    _target(state, q)
    kernels.impl.apply_1q(state.amplitudes, q, complex(u[0, 0]), complex(u[0, 1]),
                          complex(u[1, 0]), complex(u[1, 1]))
    return state


def apply_rx(state: StateVector, q: int, theta: float) -> StateVector:
    """exp(-i theta X / 2) on qubit ``q``."""
    _target(state, q)
    c, s = math.cos(theta / 2), -1j * math.sin(theta / 2)
    kernels.impl.apply_1q(state.amplitudes, q, c, s, s, c)
    return state


def apply_rz(state: StateVector, q: int, theta: float) -> StateVector:
    """exp(-i theta Z / 2) on qubit ``q``."""
    _target(state, q)
    kernels.impl.apply_rz(state.amplitudes, q, cmath.exp(-0.5j * theta), cmath.exp(0.5j * theta))
    return state


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    if control == target:
        raise SimulatorError("CNOT control and target must differ")
    _target(state, control)
    _target(state, target)
    kernels.impl.apply_cnot(state.amplitudes, control, target)
    return state


def apply_cz(state: StateVector, a: int, b: int) -> StateVector:
    if a == b:
        raise SimulatorError("CZ qubits must differ")
    _target(state, a)
    _target(state, b)
    kernels.impl.apply_cz(state.amplitudes, a, b)
    return state


def _residue_scale(pauli_sum: PauliSum) -> float:
    return max(1.0, sum(abs(t.coefficient) for t in pauli_sum.terms))


def expectation(state: StateVector, pauli_sum: PauliSum) -> float:
    """<state|H|state> for a Hermitian (real-weighted) Pauli sum."""
    if pauli_sum.n_qubits != state.n_qubits:
        raise SimulatorError(
            f"operator on {pauli_sum.n_qubits} qubits, state on {state.n_qubits}"
        )
    if not pauli_sum.is_real:
        raise SimulatorError("complex Pauli coefficients: operator is not Hermitian")
    if not pauli_sum.terms:
        return 0.0
    c = pauli_sum.compiled
    val = kernels.impl.pauli_expectation(c.group_x, c.group_ptr, c.zmask, c.coef, state.amplitudes)
    if abs(val.imag) > 1e-10 * _residue_scale(pauli_sum):
        raise SimulatorError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def matvec(pauli_sum: PauliSum, vector: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """H @ vector without materialising H."""
    vector = np.ascontiguousarray(vector, dtype=np.complex128)
    if vector.shape != (1 << pauli_sum.n_qubits,):
        raise SimulatorError(
            f"vector of shape {vector.shape} does not match {pauli_sum.n_qubits} qubits"
        )
    if out is None:
        out = np.empty_like(vector)
    if not pauli_sum.terms:
        out[:] = 0
        return out
    c = pauli_sum.compiled
    kernels.impl.pauli_matvec(c.group_x, c.group_ptr, c.zmask, c.coef, vector, out)
    return out


def pauli_overlap(bra: np.ndarray, ket: np.ndarray, x: int, z: int) -> complex:
    """<bra| X^x Z^z |ket> (no Y phase) via the active kernel."""
    return kernels.impl.pauli_overlap(bra, ket, x, z)


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    amp = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(amp / np.linalg.norm(amp), n)
