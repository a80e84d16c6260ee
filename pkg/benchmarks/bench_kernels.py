"""Time the compiled and pure-numpy kernels on the model Hamiltonian.

    python3 benchmarks/bench_kernels.py --sizes 9 12 16 --repeat 5
"""

import argparse
import statistics
import time

import numpy as np

from qskyrmion import kernels
from qskyrmion.ansatz import EntanglerLayout, compiled_circuit, n_parameters
from qskyrmion.hamiltonian import ModelParams, model_hamiltonian
from qskyrmion.lattice import LatticeSpec

SPECS = {
    4: LatticeSpec("square", 2, 2),
    7: LatticeSpec("triangular", shells=1),
    9: LatticeSpec("square", 3, 3),
    12: LatticeSpec("square", 4, 3),
    16: LatticeSpec("square", 4, 4),
    19: LatticeSpec("triangular", shells=2),
}


def timeit(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench(n, impl, repeat, layers):
    _, h = model_hamiltonian(SPECS[n], ModelParams(b_z=1.0))
    c = h.compiled
    rng = np.random.default_rng(0)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    out = np.empty_like(psi)
    circ = compiled_circuit(n, EntanglerLayout(), layers)
    theta = rng.uniform(-np.pi, np.pi, n_parameters(n, layers))
    grad = np.zeros_like(theta)

    def run_matvec():
        impl.pauli_matvec(c.group_x, c.group_ptr, c.zmask, c.coef, psi, out)

    def run_expectation():
        impl.pauli_expectation(c.group_x, c.group_ptr, c.zmask, c.coef, psi)

    def run_gradient():
        state = np.zeros_like(psi)
        state[0] = 1
        impl.run_circuit(state, *circ, theta)
        lam = np.empty_like(state)
        impl.pauli_matvec(c.group_x, c.group_ptr, c.zmask, c.coef, state, lam)
        impl.adjoint_sweep(state, lam, *circ, theta, grad)

    return {
        "matvec": timeit(run_matvec, repeat),
        "expectation": timeit(run_expectation, repeat),
        "adjoint_gradient": timeit(run_gradient, repeat),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[9, 12, 16])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--layers", type=int, default=1)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; run `python3 setup.py build_ext --inplace`")
    print(f"{'N':>3} {'kernel':<17}" + "".join(f"{b:>12}" for b in backends) + ("  speedup" if len(backends) > 1 else ""))
    for n in args.sizes:
        rows = {b: bench(n, kernels.load_backend(b), args.repeat, args.layers) for b in backends}
        for k in rows[backends[0]]:
            line = f"{n:>3} {k:<17}" + "".join(f"{rows[b][k] * 1e3:>10.3f}ms" for b in backends)
            if len(backends) > 1:
                line += f"  {rows['python'][k] / rows['cython'][k]:>6.1f}x"
            print(line)


if __name__ == "__main__":
    main()
