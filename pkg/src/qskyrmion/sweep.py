"""Field sweeps, transition detection, scaling benchmark and result files."""

from __future__ import annotations

import dataclasses
import io
import json
import logging
import math
import os
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .ansatz import AnsatzParams, EntanglerLayout, prepare_state
from .exact import ConvergenceError, LanczosConfig, dense_ground, lanczos_ground
from .hamiltonian import DENSE_CAP, HamiltonianError, ModelParams, PauliSum, build_hamiltonian, with_field
from .lattice import Lattice, LatticeError, LatticeSpec, assign_dmi, build_lattice
from .observables import MagnetizationField, dump_field, magnetization_field, topological_charge, total_magnetization
from .simulator import MAX_QUBITS
from .vqe import VqeConfig, VqeConfigError, minimize

log = logging.getLogger(__name__)

SOLVERS = ("vqe", "lanczos", "dense")
CSV_HEADER = "bz,energy,q,mx,my,mz,solver,near_degenerate,wall_time_s"
EPS_Q = 1e-9


class ConfigError(ValueError):
    pass


class OutputError(OSError):
    pass


@dataclass(frozen=True)
class SweepRange:
    start: float
    stop: float
    step: float
    refine_step: float | None = None

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError("sweep step must be positive")
        if self.start > self.stop:
            raise ConfigError("sweep start must not exceed stop")
        if self.refine_step is not None and not 0 < self.refine_step < self.step:
            raise ConfigError("refine_step must be positive and smaller than step")

    def grid(self) -> list[float]:
        return field_grid(self.start, self.stop, self.step)


def field_grid(start: float, stop: float, step: float) -> list[float]:
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + k * step, 12) for k in range(n + 1)]


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "runs/sweep"
    fields_at: tuple[float, ...] = ()
    record_timing: bool = True


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeSpec
    model: ModelParams
    sweep: SweepRange
    solver: str = "lanczos"
    vqe: VqeConfig = VqeConfig()
    exact: LanczosConfig = LanczosConfig()
    output: OutputConfig = OutputConfig()
    rng_seed: int = 0
    detect_threshold: float = 5.0

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}")
        n = self.lattice.n_sites
        cap = DENSE_CAP if self.solver == "dense" else MAX_QUBITS
        if n > cap:
            raise ConfigError(f"{n} sites exceeds the {self.solver} solver cap of {cap}")

    def to_dict(self) -> dict:
        model = dataclasses.asdict(self.model)
        model.pop("b_z")
        return {
            "lattice": self.lattice.to_dict(),
            "model": model,
            "sweep": dataclasses.asdict(self.sweep),
            "solver": {
                "name": self.solver,
                "vqe": self.vqe.to_dict(),
                "exact": dataclasses.asdict(self.exact),
            },
            "output": {
                "dir": self.output.directory,
                "fields_at": list(self.output.fields_at),
                "record_timing": self.output.record_timing,
            },
            "rng_seed": self.rng_seed,
            "detect_threshold": self.detect_threshold,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        """Build and validate a config; ``rng_seed`` is propagated to both solvers."""
        try:
            seed = int(d.get("rng_seed", 0))
            solver = d.get("solver", {})
            if isinstance(solver, str):
                solver = {"name": solver}
            out = d.get("output", {})
            model = {k: v for k, v in d.get("model", {}).items() if k != "b_z"}
            vqe = dict(solver.get("vqe", {}), rng_seed=seed)
            exact = dict(solver.get("exact", {}), rng_seed=seed)
            return cls(
                lattice=LatticeSpec.from_dict(d["lattice"]),
                model=ModelParams(**model),
                sweep=SweepRange(**d["sweep"]),
                solver=solver.get("name", "lanczos"),
                vqe=VqeConfig.from_dict(vqe),
                exact=LanczosConfig(**exact),
                output=OutputConfig(
                    directory=str(out.get("dir", "runs/sweep")),
                    fields_at=tuple(float(b) for b in out.get("fields_at", ())),
                    record_timing=bool(out.get("record_timing", True)),
                ),
                rng_seed=seed,
                detect_threshold=float(d.get("detect_threshold", 5.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"invalid run configuration: {exc}") from exc
        except (LatticeError, HamiltonianError, VqeConfigError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def with_overrides(self, **changes) -> "RunConfig":
        d = self.to_dict()
        if changes.get("solver") is not None:
            d["solver"]["name"] = changes["solver"]
        if changes.get("seed") is not None:
            d["rng_seed"] = int(changes["seed"])
        if changes.get("out") is not None:
            d["output"]["dir"] = str(changes["out"])
        return RunConfig.from_dict(d)


@dataclass
class SweepRecord:
    b_z: float
    energy: float
    q: float
    m_x: float
    m_y: float
    m_z: float
    solver: str
    near_degenerate: bool = False
    wall_time: float = 0.0
    converged: bool = True
    field: MagnetizationField | None = dataclasses.field(default=None, compare=False, repr=False)
    theta: np.ndarray | None = dataclasses.field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TransitionReport:
    b_star: float
    delta_q_rel: float
    delta_m: tuple[float, float, float]
    delta_e: float
    interval: tuple[float, float]
    index: int
    score: float
    e_kink: float


def model_lattice(config: RunConfig) -> Lattice:
    return assign_dmi(build_lattice(config.lattice), config.model.dmi_mode, config.model.dmi_magnitude)


def solve_point(
    lattice: Lattice,
    hamiltonian: PauliSum,
    config: RunConfig,
    warm_theta: np.ndarray | None = None,
):
    """Ground state with the configured solver.

    Returns ``(energy, state, near_degenerate, converged, theta)``.
    """
    if config.solver == "dense":
        gs = dense_ground(hamiltonian)
        return gs.energy, gs.vector, gs.near_degenerate, True, None
    if config.solver == "lanczos":
        try:
            gs = lanczos_ground(hamiltonian, config.exact)
            converged = True
        except ConvergenceError as exc:
            log.warning("%s", exc)
            gs, converged = exc.best, False
        return gs.energy, gs.vector, gs.near_degenerate, converged, None
    warm = [] if warm_theta is None else [warm_theta]
    res = minimize(hamiltonian, config.vqe, warm_starts=warm)
    params = AnsatzParams(res.best_theta, EntanglerLayout(config.vqe.entangler), config.vqe.layers)
    state = prepare_state(params, hamiltonian.n_qubits)
    return res.energy, state, False, res.converged, res.best_theta


def _solve_record(lattice, config: RunConfig, b: float, warm=None) -> SweepRecord:
    h = build_hamiltonian(lattice, with_field(config.model, b))
    t0 = time.perf_counter()
    e, state, degenerate, converged, theta = solve_point(lattice, h, config, warm)
    wall = time.perf_counter() - t0
    fld = magnetization_field(state, lattice)
    mx, my, mz = total_magnetization(fld)
    q = topological_charge(lattice, fld) if lattice.n_sites >= 3 else 0.0
    log.info("bz=%.4f E=%.10f Q=%.6f m=(%.4f, %.4f, %.4f)", b, e, q, mx, my, mz)
    return SweepRecord(
        b_z=b,
        energy=e,
        q=q,
        m_x=float(mx),
        m_y=float(my),
        m_z=float(mz),
        solver=config.solver,
        near_degenerate=degenerate,
        wall_time=wall if config.output.record_timing else 0.0,
        converged=converged,
        field=fld,
        theta=theta,
    )


def _sweep_points(lattice, config: RunConfig, grid: Iterable[float], known: dict[float, SweepRecord]):
    warm = None
    for b in grid:
        if b in known:
            warm = known[b].theta
            continue
        rec = _solve_record(lattice, config, b, warm)
        known[b] = rec
        warm = rec.theta


def run_sweep(config: RunConfig) -> list[SweepRecord]:
    """Solve every grid point in ascending ``b_z``.

    VQE points are warm-started from the previous grid point's optimum in
    addition to their cold restarts. With ``refine_step`` set, the interval
    flagged by :func:`detect_transition` on the coarse grid is re-sampled.
    """
    lattice = model_lattice(config)
    known: dict[float, SweepRecord] = {}
    grid = config.sweep.grid()
    _sweep_points(lattice, config, grid, known)
    if config.sweep.refine_step is not None and len(known) >= 4:
        coarse = [known[b] for b in sorted(known)]
        report = detect_transition(coarse, config.detect_threshold)
        if report is not None:
            lo, hi = report.interval
            lo = max(config.sweep.start, lo - config.sweep.step)
            hi = min(config.sweep.stop, hi + config.sweep.step)
            fine = field_grid(lo, hi, config.sweep.refine_step)
            _sweep_points(lattice, config, fine, known)
    return [known[b] for b in sorted(known)]


def detect_transition(
    records: Sequence[SweepRecord], threshold: float = 5.0, eps: float = EPS_Q
) -> TransitionReport | None:
    """Largest first difference of Q, if it exceeds ``threshold`` times the median of the others."""
    if len(records) < 4:
        raise ValueError("transition detection needs at least 4 records")
    b = np.array([r.b_z for r in records])
    q = np.array([r.q for r in records])
    e = np.array([r.energy for r in records])
    m = np.array([[r.m_x, r.m_y, r.m_z] for r in records])
    dq = np.abs(np.diff(q))
    k = int(np.argmax(dq))
    if dq[k] == 0:
        return None
    others = np.delete(dq, k)
    med = float(np.median(others))
    score = math.inf if med == 0 else float(dq[k] / med)
    if not score > threshold:
        return None
    de = np.diff(e)
    neighbours = [de[j] for j in (k - 1, k + 1) if 0 <= j < len(de)]
    kink = float(de[k] - np.mean(neighbours)) if neighbours else 0.0
    return TransitionReport(
        b_star=float(0.5 * (b[k] + b[k + 1])),
        delta_q_rel=float(dq[k] / max(abs(q[k]), eps)),
        delta_m=tuple(float(v) for v in m[k + 1] - m[k]),
        delta_e=float(de[k]),
        interval=(float(b[k]), float(b[k + 1])),
        index=k,
        score=score,
        e_kink=kink,
    )


# ---------------------------------------------------------------- benchmark


@dataclass
class BenchCell:
    solver: str
    lattice: LatticeSpec
    n_sites: int
    times: list[float]
    energy: float | None
    missing: bool = False

    @property
    def median(self) -> float | None:
        return None if self.missing or not self.times else statistics.median(self.times)


@dataclass
class BenchmarkReport:
    cells: list[BenchCell]
    exponents: dict[str, float]
    prefactors: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "cells": [
                {
                    "solver": c.solver,
                    "lattice": c.lattice.to_dict(),
                    "n_sites": c.n_sites,
                    "times_s": c.times,
                    "median_s": c.median,
                    "energy": c.energy,
                    "missing": c.missing,
                }
                for c in self.cells
            ],
            "exponents": self.exponents,
            "prefactors": self.prefactors,
        }

    def to_text(self) -> str:
        rows = [("solver", "lattice", "N", "median_s", "energy")]
        for c in self.cells:
            lat = f"{c.lattice.kind}:" + (
                f"{c.lattice.nx}x{c.lattice.ny}" if c.lattice.kind == "square" else f"shells={c.lattice.shells}"
            )
            med = "missing" if c.median is None else f"{c.median:.4g}"
            en = "" if c.energy is None else f"{c.energy:.8f}"
            rows.append((c.solver, lat, str(c.n_sites), med, en))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
        lines.append("")
        for s, p in self.exponents.items():
            lines.append(f"fit {s}: time ~ N^{p:.3f}")
        return "\n".join(lines) + "\n"


def fit_power_law(ns: Sequence[float], times: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of log(time) = p log(N) + log(c); returns (p, c)."""
    if len(ns) < 2:
        raise ValueError("need at least two sizes to fit")
    p, logc = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(times, float)), 1)
    return float(p), float(math.exp(logc))


def _default_solver(name: str, vqe_config: VqeConfig, exact_config: LanczosConfig):
    if name == "lanczos":
        return lambda h: lanczos_ground(h, exact_config).energy
    if name == "vqe":
        return lambda h: minimize(h, vqe_config).energy
    if name == "dense":
        return lambda h: dense_ground(h).energy
    raise ConfigError(f"unknown solver {name!r}")


def run_benchmark(
    sizes: Sequence[LatticeSpec],
    solvers: Sequence[str] | dict[str, Callable[[PauliSum], float]],
    repetitions: int = 3,
    params: ModelParams = ModelParams(b_z=1.0),
    vqe_config: VqeConfig = VqeConfig(restarts=1),
    exact_config: LanczosConfig = LanczosConfig(),
    timeout: float | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> BenchmarkReport:
    """Median time-to-ground-state per (solver, size) and fitted scaling exponents.

    A cell whose first repetition exceeds ``timeout`` seconds is recorded as
    missing, as are all larger sizes for that solver.
    """
    if repetitions < 3:
        raise ConfigError("benchmark needs at least 3 repetitions")
    if not isinstance(solvers, dict):
        solvers = {s: _default_solver(s, vqe_config, exact_config) for s in solvers}
    ordered = sorted(sizes, key=lambda s: s.n_sites)
    cells = []
    exponents, prefactors = {}, {}
    for name, fn in solvers.items():
        timed_out = False
        for spec in ordered:
            lattice = assign_dmi(build_lattice(spec), params.dmi_mode, params.dmi_magnitude)
            h = build_hamiltonian(lattice, params)
            cell = BenchCell(name, spec, spec.n_sites, [], None, missing=timed_out)
            if not timed_out:
                for _ in range(repetitions):
                    t0 = clock()
                    cell.energy = float(fn(h))
                    cell.times.append(clock() - t0)
                    if timeout is not None and cell.times[-1] > timeout:
                        cell.missing = timed_out = True
                        break
                log.info("bench %s N=%d median %.4g s", name, spec.n_sites, cell.median or math.nan)
            cells.append(cell)
        done = [c for c in cells if c.solver == name and not c.missing]
        if len({c.n_sites for c in done}) >= 2:
            exponents[name], prefactors[name] = fit_power_law(
                [c.n_sites for c in done], [c.median for c in done]
            )
    return BenchmarkReport(cells, exponents, prefactors)


# ------------------------------------------------------------------ output


def format_csv(records: Sequence[SweepRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        tag = r.solver if r.converged else f"{r.solver}-unconverged"
        lines.append(
            ",".join(
                [
                    repr(float(r.b_z)),
                    repr(float(r.energy)),
                    repr(float(r.q)),
                    repr(float(r.m_x)),
                    repr(float(r.m_y)),
                    repr(float(r.m_z)),
                    tag,
                    "true" if r.near_degenerate else "false",
                    repr(float(r.wall_time)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def read_csv(path: str | os.PathLike) -> list[SweepRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected CSV header")
    out = []
    for line in lines[1:]:
        bz, e, q, mx, my, mz, tag, deg, wall = line.split(",")
        converged = not tag.endswith("-unconverged")
        out.append(
            SweepRecord(
                float(bz), float(e), float(q), float(mx), float(my), float(mz),
                tag.removesuffix("-unconverged"), deg == "true", float(wall), converged,
            )
        )
    return out


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def field_filename(b: float) -> str:
    return f"field_bz_{b:.4f}.txt"


def write_outputs(
    records: Sequence[SweepRecord],
    report: TransitionReport | None,
    config: RunConfig,
    out_dir: str | os.PathLike | None = None,
) -> dict[str, Path]:
    """Write sweep CSV, field dumps, transition report and the run manifest."""
    if not records:
        raise ValueError("no records to write")
    out = Path(out_dir if out_dir is not None else config.output.directory)
    paths = {"csv": out / "sweep.csv", "manifest": out / "manifest.json"}
    _write(paths["csv"], format_csv(records))

    for b in config.output.fields_at:
        rec = min(records, key=lambda r: abs(r.b_z - b))
        if rec.field is None:
            continue
        p = out / "fields" / field_filename(rec.b_z)
        buf = io.StringIO()
        dump_field(rec.field, buf)
        _write(p, buf.getvalue())
        paths[f"field:{rec.b_z!r}"] = p

    if report is not None:
        paths["transition"] = out / "transition.json"
        _write(paths["transition"], json.dumps(dataclasses.asdict(report), indent=2) + "\n")

    manifest = {"version": __version__, "config": config.to_dict()}
    _write(paths["manifest"], json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return paths


def load_manifest(path: str | os.PathLike) -> RunConfig:
    return RunConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8"))["config"])


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return RunConfig.from_dict(data)
