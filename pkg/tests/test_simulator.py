import cmath
import math

import numpy as np
import pytest

from conftest import naive_dense, random_pauli_sum, random_vector
from qskyrmion.hamiltonian import PauliString, PauliSum, dense_matrix
from qskyrmion.simulator import (
    SimulatorError,
    StateVector,
    apply_cnot,
    apply_cz,
    apply_rx,
    apply_rz,
    apply_unitary_1q,
    expectation,
    matvec,
    random_state,
    zero_state,
)

Z0 = PauliSum((PauliString.of(1.0, (0, "Z")),), 1)
Y0 = PauliSum((PauliString.of(1.0, (0, "Y")),), 1)


def z_on(q, n):
    return PauliSum((PauliString.of(1.0, (q, "Z")),), n)


def basis(n, k):
    v = np.zeros(1 << n, dtype=complex)
    v[k] = 1
    return StateVector(v, n)


def test_zero_state():
    np.testing.assert_array_equal(zero_state(1).amplitudes, [1, 0])
    np.testing.assert_array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])
    s = zero_state(3)
    assert all(expectation(s, z_on(q, 3)) == 1.0 for q in range(3))


def test_zero_state_cap():
    with pytest.raises(SimulatorError):
        zero_state(27)
    with pytest.raises(SimulatorError):
        zero_state(0)
    with pytest.raises(SimulatorError):
        zero_state(5, cap=4)


def test_rx_pi_flips(backend):
    s = apply_rx(zero_state(1), 0, math.pi)
    np.testing.assert_allclose(s.amplitudes, [0, -1j], atol=1e-15)
    assert math.isclose(expectation(s, Z0), -1.0)


def test_rx_half_pi_gives_minus_y(backend):
    s = apply_rx(zero_state(1), 0, math.pi / 2)
    assert math.isclose(expectation(s, Y0), -1.0, abs_tol=1e-15)


def test_rz_on_basis_state_only_changes_phase(backend):
    s = basis(3, 0b101)
    before = [expectation(s, z_on(q, 3)) for q in range(3)]
    apply_rz(s, 0, 0.7)
    apply_rz(s, 1, -1.3)
    assert [expectation(s, z_on(q, 3)) for q in range(3)] == before
    assert math.isclose(abs(s.amplitudes[0b101]), 1.0)


def test_rotation_composition(backend):
    rng = np.random.default_rng(1)
    for gate in (apply_rx, apply_rz):
        a = random_state(4, rng)
        b = a.copy()
        gate(gate(a, 2, 0.4), 2, 1.1)
        gate(b, 2, 1.5)
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


def test_rx_matches_dense_matrix(backend):
    rng = np.random.default_rng(2)
    theta = 0.83
    u = np.array([[math.cos(theta / 2), -1j * math.sin(theta / 2)],
                  [-1j * math.sin(theta / 2), math.cos(theta / 2)]])
    s = random_state(3, rng)
    full = np.kron(np.kron(np.eye(2), u), np.eye(2))  # qubit 1
    expected = full @ s.amplitudes
    np.testing.assert_allclose(apply_rx(s, 1, theta).amplitudes, expected, atol=1e-14)


def test_cnot_examples(backend):
    s = apply_cnot(basis(2, 0b01), 0, 1)
    np.testing.assert_array_equal(s.amplitudes, basis(2, 0b11).amplitudes)
    s = apply_cnot(zero_state(2), 0, 1)
    np.testing.assert_array_equal(s.amplitudes, zero_state(2).amplitudes)


def test_cnot_and_cz_are_involutions(backend):
    rng = np.random.default_rng(3)
    s = random_state(5, rng)
    ref = s.amplitudes.copy()
    apply_cnot(apply_cnot(s, 3, 1), 3, 1)
    np.testing.assert_array_equal(s.amplitudes, ref)
    apply_cz(apply_cz(s, 0, 4), 0, 4)
    np.testing.assert_array_equal(s.amplitudes, ref)


def test_cz_sign(backend):
    s = apply_cz(basis(3, 0b101), 0, 2)
    assert s.amplitudes[0b101] == -1
    s = apply_cz(basis(3, 0b001), 0, 2)
    assert s.amplitudes[0b001] == 1


def test_gate_argument_checks():
    s = zero_state(2)
    with pytest.raises(SimulatorError):
        apply_cnot(s, 1, 1)
    with pytest.raises(SimulatorError):
        apply_cz(s, 0, 0)
    with pytest.raises(SimulatorError):
        apply_rx(s, 2, 0.1)


def test_norm_after_many_random_gates(backend):
    rng = np.random.default_rng(4)
    n = 6
    s = random_state(n, rng)
    for _ in range(10_000):
        kind = rng.integers(4)
        q = int(rng.integers(n))
        if kind == 0:
            apply_rx(s, q, rng.uniform(-np.pi, np.pi))
        elif kind == 1:
            apply_rz(s, q, rng.uniform(-np.pi, np.pi))
        else:
            p = int((q + rng.integers(1, n)) % n)
            (apply_cnot if kind == 2 else apply_cz)(s, q, p)
    assert abs(s.norm() - 1) < 1e-10


def test_gate_locality(backend):
    rng = np.random.default_rng(5)
    n = 4
    s = random_state(n, rng)
    probs = np.abs(s.amplitudes.reshape([2] * n)) ** 2

    def marginal(p, keep_axis):
        axes = tuple(a for a in range(n) if a != keep_axis)
        return p.sum(axis=axes)

    # numpy axis n-1-q holds qubit q
    apply_rx(s, 1, 0.9)
    after = np.abs(s.amplitudes.reshape([2] * n)) ** 2
    for q in (0, 2, 3):
        np.testing.assert_allclose(marginal(after, n - 1 - q), marginal(probs, n - 1 - q), atol=1e-12)
    # the sector of fixed untouched bits keeps its total probability
    np.testing.assert_allclose(after.sum(axis=n - 2), probs.sum(axis=n - 2), atol=1e-12)


def test_apply_unitary_1q(backend):
    rng = np.random.default_rng(6)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    s = random_state(2, rng)
    expected = np.kron(h, np.eye(2)) @ s.amplitudes
    np.testing.assert_allclose(apply_unitary_1q(s, 1, h).amplitudes, expected, atol=1e-14)


def test_expectation_examples(backend):
    assert expectation(zero_state(1), Z0) == 1.0


def test_expectation_matches_dense(backend):
    rng = np.random.default_rng(7)
    for _ in range(5):
        h = random_pauli_sum(6, rng, n_terms=20)
        s = random_state(6, rng)
        ref = np.vdot(s.amplitudes, naive_dense(h) @ s.amplitudes)
        assert abs(expectation(s, h) - ref.real) < 1e-10


def test_expectation_global_phase_invariance(backend):
    rng = np.random.default_rng(8)
    h = random_pauli_sum(5, rng)
    s = random_state(5, rng)
    t = StateVector(s.amplitudes * cmath.exp(0.77j), 5)
    assert abs(expectation(s, h) - expectation(t, h)) < 1e-12


def test_expectation_rejects_complex_and_mismatch():
    h = PauliSum((PauliString.of(1j, (0, "Z")),), 1)
    with pytest.raises(SimulatorError):
        expectation(zero_state(1), h)
    with pytest.raises(SimulatorError):
        expectation(zero_state(2), Z0)


def test_matvec_basis_example(backend):
    e0 = zero_state(1).amplitudes
    np.testing.assert_array_equal(matvec(Z0, e0), e0)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 7, 10])
def test_matvec_matches_dense(backend, n):
    rng = np.random.default_rng(100 + n)
    h = random_pauli_sum(n, rng, n_terms=4 * n)
    v = random_vector(n, rng)
    np.testing.assert_allclose(matvec(h, v), dense_matrix(h) @ v, atol=1e-10)


def test_matvec_linear_and_hermitian(backend):
    rng = np.random.default_rng(9)
    h = random_pauli_sum(6, rng)
    u, v = random_vector(6, rng), random_vector(6, rng)
    a, b = 0.3 - 1.2j, 2.1 + 0.4j
    np.testing.assert_allclose(matvec(h, a * u + b * v), a * matvec(h, u) + b * matvec(h, v), atol=1e-12)
    assert abs(np.vdot(u, matvec(h, v)) - np.vdot(matvec(h, u), v)) < 1e-10


def test_matvec_dimension_mismatch():
    with pytest.raises(SimulatorError):
        matvec(Z0, np.zeros(4))


def test_backends_agree():
    from qskyrmion import kernels

    if len(kernels.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    c, p = kernels.load_backend("cython"), kernels.load_backend("python")
    rng = np.random.default_rng(10)
    h = random_pauli_sum(8, rng, n_terms=30).compiled
    v = random_vector(8, rng)
    out_c, out_p = np.empty_like(v), np.empty_like(v)
    c.pauli_matvec(h.group_x, h.group_ptr, h.zmask, h.coef, v, out_c)
    p.pauli_matvec(h.group_x, h.group_ptr, h.zmask, h.coef, v, out_p)
    np.testing.assert_allclose(out_c, out_p, atol=1e-13)
