"""Variational ground-state search over hardware-efficient ansatz angles."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .ansatz import (
    AnsatzParams,
    EntanglerLayout,
    adjoint_gradient,
    n_parameters,
    parameter_shift_gradient,
)
from .ansatz import energy as ansatz_energy
from .hamiltonian import PauliSum

OPTIMIZERS = ("lbfgs", "gradient_descent_parameter_shift", "derivative_free_simplex")
GRADIENTS = ("adjoint", "parameter_shift")


class VqeConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VqeConfig:
    optimizer: str = "lbfgs"
    gradient: str = "adjoint"
    max_evals: int = 5000
    energy_tol: float = 1e-8
    restarts: int = 4
    rng_seed: int = 0
    initial_strategy: str = "zeros_plus_random"
    entangler: str = "cnot_chain"
    layers: int = 1
    stall_window: int = 50
    step_size: float = 0.1
    lbfgs_memory: int = 30

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise VqeConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.gradient not in GRADIENTS:
            raise VqeConfigError(f"unknown gradient method {self.gradient!r}")
        if self.max_evals < 1:
            raise VqeConfigError("max_evals must be >= 1")
        if not self.energy_tol > 0:
            raise VqeConfigError("energy_tol must be positive")
        if self.restarts < 1:
            raise VqeConfigError("restarts must be >= 1")
        if self.initial_strategy not in ("zeros_plus_random", "all_random"):
            raise VqeConfigError(f"unknown initial strategy {self.initial_strategy!r}")
        if self.layers < 1:
            raise VqeConfigError("layers must be >= 1")
        if self.lbfgs_memory < 1:
            raise VqeConfigError("lbfgs_memory must be >= 1")
        EntanglerLayout(self.entangler)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "VqeConfig":
        return cls(**d)


@dataclass(eq=False)
class VqeResult:
    best_theta: np.ndarray
    energy: float
    evaluations: int
    restart_energies: np.ndarray
    converged: bool
    traces: list[np.ndarray] = field(default_factory=list)
    best_restart: int = 0


def energy(theta, hamiltonian: PauliSum, entangler: str = "cnot_chain", layers: int = 1) -> float:
    params = AnsatzParams(theta, EntanglerLayout(entangler), layers)
    return ansatz_energy(params, hamiltonian)


class _Objective:
    """Energy/gradient oracle that records the best-so-far trace."""

    def __init__(self, hamiltonian: PauliSum, config: VqeConfig):
        self.h = hamiltonian
        self.cfg = config
        self.template = AnsatzParams(
            np.zeros(n_parameters(hamiltonian.n_qubits, config.layers)),
            EntanglerLayout(config.entangler),
            config.layers,
        )
        self.evals = 0
        self.best = math.inf
        self.best_theta = None
        self.trace: list[float] = []

    def _record(self, theta, e):
        self.evals += 1
        if e < self.best:
            self.best = e
            self.best_theta = np.array(theta, dtype=float)
        self.trace.append(self.best)

    def value(self, theta) -> float:
        e = ansatz_energy(self.template.with_theta(theta), self.h)
        self._record(theta, e)
        return e

    def value_and_grad(self, theta):
        p = self.template.with_theta(theta)
        if self.cfg.gradient == "adjoint":
            e, g = adjoint_gradient(p, self.h)
        else:
            e = ansatz_energy(p, self.h)
            g = parameter_shift_gradient(p, self.h)
        self._record(theta, e)
        return e, g


def _stalled(trace: list[float], window: int, tol: float) -> bool:
    return len(trace) > window and trace[-window - 1] - trace[-1] < tol


def _run_lbfgs(obj: _Objective, x0: np.ndarray) -> bool:
    cfg = obj.cfg
    res = optimize.minimize(
        obj.value_and_grad,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={
            "maxfun": cfg.max_evals,
            "maxiter": cfg.max_evals,
            "maxcor": cfg.lbfgs_memory,
            "ftol": 1e-15,
            "gtol": 1e-9,
        },
    )
    return bool(res.success) or _stalled(obj.trace, cfg.stall_window, cfg.energy_tol)


def _run_gradient_descent(obj: _Objective, x0: np.ndarray) -> bool:
    """Gradient steps with halving on non-improvement and mild growth otherwise."""
    cfg = obj.cfg
    x = x0.copy()
    e, g = obj.value_and_grad(x)
    step = cfg.step_size
    since_improvement = 0
    while obj.evals < cfg.max_evals:
        trial = x - step * g
        e_new, g_new = obj.value_and_grad(trial)
        if e_new < e:
            gain = e - e_new
            x, e, g = trial, e_new, g_new
            step *= 1.2
            since_improvement = 0 if gain >= cfg.energy_tol else since_improvement + 1
        else:
            step *= 0.5
            since_improvement += 1
        if since_improvement >= cfg.stall_window or step < 1e-12:
            return True
    return False


def _run_simplex(obj: _Objective, x0: np.ndarray) -> bool:
    cfg = obj.cfg
    res = optimize.minimize(
        obj.value,
        x0,
        method="Nelder-Mead",
        options={"maxfev": cfg.max_evals, "xatol": 1e-10, "fatol": cfg.energy_tol, "adaptive": True},
    )
    return bool(res.success)


_RUNNERS = {
    "lbfgs": _run_lbfgs,
    "gradient_descent_parameter_shift": _run_gradient_descent,
    "derivative_free_simplex": _run_simplex,
}


def initial_points(n_params: int, config: VqeConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(config.rng_seed)
    points = []
    if config.initial_strategy == "zeros_plus_random":
        points.append(np.zeros(n_params))
    while len(points) < config.restarts:
        points.append(rng.uniform(-math.pi, math.pi, n_params))
    return points


def minimize(
    hamiltonian: PauliSum,
    config: VqeConfig = VqeConfig(),
    warm_starts: Sequence[np.ndarray] = (),
) -> VqeResult:
    """Best of ``config.restarts`` cold starts plus any ``warm_starts``.

    Ties are broken by the lower restart index; warm starts come last.
    """
    n_params = n_parameters(hamiltonian.n_qubits, config.layers)
    starts = initial_points(n_params, config)
    for w in warm_starts:
        w = np.asarray(w, dtype=float)
        if w.shape != (n_params,):
            raise VqeConfigError(f"warm start has shape {w.shape}, expected ({n_params},)")
        starts.append(w.copy())

    run = _RUNNERS[config.optimizer]
    energies, thetas, traces, flags = [], [], [], []
    total = 0
    for x0 in starts:
        obj = _Objective(hamiltonian, config)
        flags.append(run(obj, x0))
        total += obj.evals
        energies.append(obj.best)
        thetas.append(obj.best_theta)
        traces.append(np.array(obj.trace))
    best = int(np.argmin(energies))
    theta = thetas[best]
    e = energy(theta, hamiltonian, config.entangler, config.layers)
    return VqeResult(
        best_theta=theta,
        energy=e,
        evaluations=total,
        restart_energies=np.array(energies),
        converged=flags[best],
        traces=traces,
        best_restart=best,
    )
