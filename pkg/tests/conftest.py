import sys

import numpy as np
import pytest

from qskyrmion import kernels
from qskyrmion.hamiltonian import PauliString, PauliSum


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run a test once per kernel backend, restoring the default afterwards."""
    saved = kernels.impl
    kernels.impl = kernels.load_backend(request.param)
    yield request.param
    kernels.impl = saved


def random_pauli_sum(n, rng, n_terms=None, max_weight=3):
    n_terms = n_terms or 3 * n
    terms = []
    for _ in range(n_terms):
        k = int(rng.integers(1, min(max_weight, n) + 1))
        sites = rng.choice(n, size=k, replace=False)
        factors = tuple((int(s), str(rng.choice(list("XYZ")))) for s in sites)
        terms.append(PauliString(factors, float(rng.normal())))
    return PauliSum(tuple(terms), n)


def random_vector(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def naive_dense(pauli_sum):
    """Kronecker-product reference, qubit 0 least significant (rightmost factor)."""
    n = pauli_sum.n_qubits
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for t in pauli_sum.terms:
        axes = dict(t.factors)
        m = np.array([[1.0 + 0j]])
        for q in reversed(range(n)):
            m = np.kron(m, _PAULI[axes.get(q, "I")])
        out += t.coefficient * m
    return out


def pytest_runtest_logreport(report):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and report.failed and "test_acceptance.py::" in report.nodeid:
        mod.record_failure(report.nodeid, str(report.longrepr).strip().splitlines()[-1][:120])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
