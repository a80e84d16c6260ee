"""Hardware-efficient ansatz: Euler rotations around a fixed entangler.

Parameters are laid out in execution order. Each Euler set holds
``(theta1, theta2, theta3)`` per qubit and is applied as
``Rz(theta3) -> Rx(theta2) -> Rz(theta1)``. With ``layers = L`` there are
``L + 1`` Euler sets and ``L`` entanglers in between, so ``3 N (L + 1)``
angles in total; ``L = 1`` gives the usual ``6 N``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .hamiltonian import PauliSum
from .simulator import StateVector, expectation, matvec, zero_state

ENTANGLERS = ("cnot_chain", "cz_chain", "cnot_ring")


class AnsatzError(ValueError):
    pass


@dataclass(frozen=True)
class EntanglerLayout:
    kind: str = "cnot_chain"

    def __post_init__(self):
        if self.kind not in ENTANGLERS:
            raise AnsatzError(f"unknown entangler {self.kind!r}")

    def pairs(self, n: int) -> list[tuple[int, int]]:
        chain = [(q, q + 1) for q in range(n - 1)]
        if self.kind == "cnot_ring" and n > 2:
            chain.append((n - 1, 0))
        return chain

    @property
    def gate(self) -> str:
        return "cz" if self.kind == "cz_chain" else "cnot"


@dataclass(frozen=True, eq=False)
class AnsatzParams:
    theta: np.ndarray
    layout: EntanglerLayout = EntanglerLayout()
    layers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if self.layers < 1:
            raise AnsatzError("layers must be >= 1")

    def with_theta(self, theta) -> "AnsatzParams":
        return AnsatzParams(theta, self.layout, self.layers)


def n_parameters(n: int, layers: int = 1) -> int:
    return 3 * n * (layers + 1)


def circuit(n: int, layout: EntanglerLayout, layers: int) -> list[tuple]:
    """Gate list ``(name, qubits, parameter index or None)`` in execution order."""
    ops = []
    for s in range(layers + 1):
        base = 3 * n * s
        for q in range(n):
            k = base + 3 * q
            ops.append(("rz", (q,), k + 2))
            ops.append(("rx", (q,), k + 1))
            ops.append(("rz", (q,), k))
        if s < layers:
            ops.extend((layout.gate, pair, None) for pair in layout.pairs(n))
    return ops


_OPCODE = {"rz": 0, "rx": 1, "cnot": 2, "cz": 3}


@functools.lru_cache(maxsize=64)
def compiled_circuit(n: int, layout: EntanglerLayout, layers: int) -> tuple[np.ndarray, ...]:
    """Circuit as flat arrays ``(kinds, qa, qb, pidx)`` for the kernels."""
    ops = circuit(n, layout, layers)
    kinds = np.array([_OPCODE[name] for name, _, _ in ops], dtype=np.int32)
    qa = np.array([q[0] for _, q, _ in ops], dtype=np.int32)
    qb = np.array([q[1] if len(q) > 1 else -1 for _, q, _ in ops], dtype=np.int32)
    pidx = np.array([-1 if k is None else k for _, _, k in ops], dtype=np.int64)
    for arr in (kinds, qa, qb, pidx):
        arr.flags.writeable = False
    return kinds, qa, qb, pidx


def _check(params: AnsatzParams, n: int):
    expected = n_parameters(n, params.layers)
    if params.theta.shape != (expected,):
        raise AnsatzError(f"expected {expected} angles for {n} qubits, got {params.theta.shape}")


def prepare_state(params: AnsatzParams, n: int) -> StateVector:
    _check(params, n)
    state = zero_state(n)
    kernels.impl.run_circuit(state.amplitudes, *compiled_circuit(n, params.layout, params.layers),
                             np.ascontiguousarray(params.theta, dtype=float))
    return state


def energy(params: AnsatzParams, hamiltonian: PauliSum) -> float:
    return expectation(prepare_state(params, hamiltonian.n_qubits), hamiltonian)


def parameter_shift_gradient(params: AnsatzParams, hamiltonian: PauliSum) -> np.ndarray:
    """Exact gradient from energies at theta_k +/- pi/2."""
    n = hamiltonian.n_qubits
    _check(params, n)
    grad = np.empty_like(params.theta)
    shifted = params.theta.copy()
    for k in range(shifted.size):
        shifted[k] = params.theta[k] + math.pi / 2
        e_plus = energy(params.with_theta(shifted), hamiltonian)
        shifted[k] = params.theta[k] - math.pi / 2
        e_minus = energy(params.with_theta(shifted), hamiltonian)
        shifted[k] = params.theta[k]
        grad[k] = 0.5 * (e_plus - e_minus)
    return grad


def adjoint_gradient(params: AnsatzParams, hamiltonian: PauliSum) -> tuple[float, np.ndarray]:
    """Energy and gradient by reverse-mode sweep over the circuit.

    Gives the same values as :func:`parameter_shift_gradient` at the cost of
    roughly three circuit passes plus one matvec.
    """
    n = hamiltonian.n_qubits
    _check(params, n)
    psi = prepare_state(params, n)
    lam = matvec(hamiltonian, psi.amplitudes)
    e = float(np.vdot(psi.amplitudes, lam).real)
    grad = np.zeros_like(params.theta)
    # dU/dtheta = -i/2 G U  =>  dE/dtheta = Im <lam_k|G|psi_k>
    kernels.impl.adjoint_sweep(psi.amplitudes, lam, *compiled_circuit(n, params.layout, params.layers),
                               np.ascontiguousarray(params.theta, dtype=float), grad)
    return e, grad
