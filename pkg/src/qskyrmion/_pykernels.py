"""Pure-numpy implementations of the statevector kernels.

Same signatures and in-place semantics as the compiled ``_ckernels`` module.
"""

from __future__ import annotations

import numpy as np


def _basis(dim: int) -> np.ndarray:
    return np.arange(dim, dtype=np.uint64)


def _signs(b: np.ndarray, z: int) -> np.ndarray:
    parity = np.bitwise_count(b & np.uint64(z)) & 1
    return 1.0 - 2.0 * parity


def apply_1q(psi, q, u00, u01, u10, u11):
    v = psi.reshape(-1, 2, 1 << q)
    a = v[:, 0, :].copy()
    v[:, 0, :] = u00 * a + u01 * v[:, 1, :]
    v[:, 1, :] = u10 * a + u11 * v[:, 1, :]


def apply_rz(psi, q, phase0, phase1):
    v = psi.reshape(-1, 2, 1 << q)
    v[:, 0, :] *= phase0
    v[:, 1, :] *= phase1


def apply_cnot(psi, control, target):
    idx = _basis(psi.shape[0])
    cbit, tbit = np.uint64(1 << control), np.uint64(1 << target)
    sel = idx[((idx & cbit) != 0) & ((idx & tbit) == 0)]
    flipped = sel | tbit
    tmp = psi[sel].copy()
    psi[sel] = psi[flipped]
    psi[flipped] = tmp


def apply_cz(psi, a, b):
    idx = _basis(psi.shape[0])
    mask = np.uint64((1 << a) | (1 << b))
    psi[(idx & mask) == mask] *= -1


def pauli_matvec(group_x, group_ptr, zmask, coef, psi, out):
    idx = _basis(psi.shape[0])
    out[:] = 0
    for g, x in enumerate(group_x):
        b = idx ^ x
        s = np.zeros(psi.shape[0], dtype=np.complex128)
        for t in range(group_ptr[g], group_ptr[g + 1]):
            s += coef[t] * _signs(b, zmask[t])
        out += s * psi[b]


def pauli_expectation(group_x, group_ptr, zmask, coef, psi):
    out = np.empty_like(psi)
    pauli_matvec(group_x, group_ptr, zmask, coef, psi, out)
    return complex(np.vdot(psi, out))


def pauli_overlap(bra, ket, x, z):
    b = _basis(ket.shape[0]) ^ np.uint64(x)
    return complex(np.vdot(bra, _signs(b, z) * ket[b]))


OP_RZ, OP_RX, OP_CNOT, OP_CZ = 0, 1, 2, 3


def _op(psi, kind, qa, qb, theta):
    if kind == OP_RZ:
        apply_rz(psi, qa, np.exp(-0.5j * theta), np.exp(0.5j * theta))
    elif kind == OP_RX:
        c, s = np.cos(theta / 2), -1j * np.sin(theta / 2)
        apply_1q(psi, qa, c, s, s, c)
    elif kind == OP_CNOT:
        apply_cnot(psi, qa, qb)
    else:
        apply_cz(psi, qa, qb)


def run_circuit(psi, kinds, qa, qb, pidx, theta):
    for k in range(len(kinds)):
        t = theta[pidx[k]] if pidx[k] >= 0 else 0.0
        _op(psi, kinds[k], qa[k], qb[k], t)


def adjoint_sweep(psi, lam, kinds, qa, qb, pidx, theta, grad):
    for k in range(len(kinds) - 1, -1, -1):
        t = theta[pidx[k]] if pidx[k] >= 0 else 0.0
        if kinds[k] in (OP_RZ, OP_RX):
            bit = 1 << int(qa[k])
            x, z = (bit, 0) if kinds[k] == OP_RX else (0, bit)
            grad[pidx[k]] = pauli_overlap(lam, psi, x, z).imag
        _op(psi, kinds[k], qa[k], qb[k], -t)
        _op(lam, kinds[k], qa[k], qb[k], -t)
