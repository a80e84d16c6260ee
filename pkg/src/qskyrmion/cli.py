"""Command line: ``qskyrmion sweep | bench | pattern``.

Exit codes: 0 success, 1 configuration error, 2 solver failed on every
point, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .hamiltonian import ModelParams
from .lattice import LatticeSpec
from .sweep import (
    ConfigError,
    OutputError,
    RunConfig,
    detect_transition,
    load_config,
    run_benchmark,
    run_sweep,
    write_outputs,
)
from .vqe import VqeConfig

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

def parse_lattice(text: str) -> LatticeSpec:
    """``square:4x4`` or ``triangular:2`` (shells)."""
    try:
        kind, size = text.split(":")
        if kind in ("square", "sq"):
            nx, ny = size.lower().split("x")
            return LatticeSpec("square", int(nx), int(ny))
        if kind in ("triangular", "tri"):
            return LatticeSpec("triangular", shells=int(size))
    except ValueError:
        pass
    raise ConfigError(f"cannot parse lattice {text!r}; use square:NXxNY or triangular:SHELLS")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="run-configuration JSON file")
    p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    p.add_argument("--solver", choices=("vqe", "lanczos", "dense"), help="ground-state solver")
    p.add_argument("--seed", type=int, help="RNG seed for start vectors and restarts")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qskyrmion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="sweep b_z and record E, Q and magnetization")
    _add_common(sw)
    sw.add_argument("--lattice", help="square:NXxNY or triangular:SHELLS")
    sw.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "STEP"))

    pt = sub.add_parser("pattern", help="solve one field value and dump the magnetization field")
    _add_common(pt)
    pt.add_argument("--lattice", help="square:NXxNY or triangular:SHELLS")
    pt.add_argument("--bz", type=float, required=True)

    be = sub.add_parser("bench", help="time-to-ground-state scaling for both solvers")
    _add_common(be)
    be.add_argument(
        "--sizes",
        default="triangular:1,square:3x3,square:4x4,triangular:2",
        help="comma-separated lattice list",
    )
    be.add_argument("--solvers", default="vqe,lanczos")
    be.add_argument("--repetitions", type=int, default=3)
    be.add_argument("--timeout", type=float, default=None, help="seconds per run before a cell is dropped")
    return parser


def _default_config() -> dict:
    return {
        "lattice": {"kind": "square", "nx": 4, "ny": 4},
        "model": {"j_par": -1.0, "j_perp": 0.5, "dmi_magnitude": 1.0, "dmi_mode": "parallel"},
        "sweep": {"start": 1.5, "stop": 2.2, "step": 0.01},
        "solver": {"name": "lanczos"},
        "output": {"dir": "runs/sweep"},
        "rng_seed": 0,
    }


def resolve_config(args) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
        data = cfg.to_dict()
    else:
        data = _default_config()
    if getattr(args, "lattice", None):
        data["lattice"] = parse_lattice(args.lattice).to_dict()
    if getattr(args, "range", None):
        start, stop, step = args.range
        data["sweep"] = dict(data["sweep"], start=start, stop=stop, step=step)
    if getattr(args, "bz", None) is not None:
        data["sweep"] = {"start": args.bz, "stop": args.bz, "step": 1.0}
        data["output"] = dict(data.get("output", {}), fields_at=[args.bz])
    cfg = RunConfig.from_dict(data)
    return cfg.with_overrides(solver=args.solver, seed=args.seed, out=args.out)


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    records = run_sweep(cfg)
    report = detect_transition(records, cfg.detect_threshold) if len(records) >= 4 else None
    paths = write_outputs(records, report, cfg)
    print(f"wrote {len(records)} records to {paths['csv']}")
    if report is not None:
        print(
            f"transition at b_z = {report.b_star:.4f} "
            f"(|dQ|/|Q| = {report.delta_q_rel:.3g}, dE = {report.delta_e:.5g})"
        )
    else:
        print("no transition detected")
    return EXIT_SOLVER if not any(r.converged for r in records) else EXIT_OK


def cmd_pattern(args) -> int:
    cfg = resolve_config(args)
    records = run_sweep(cfg)
    rec = records[0]
    paths = write_outputs(records, None, cfg)
    print(f"b_z = {rec.b_z}  E = {rec.energy:.10f}  Q = {rec.q:.6g}")
    print(f"M = ({rec.m_x:.6f}, {rec.m_y:.6f}, {rec.m_z:.6f})")
    print(f"field dump: {paths[f'field:{rec.b_z!r}']}")
    return EXIT_OK if rec.converged else EXIT_SOLVER


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    sizes = [parse_lattice(s) for s in args.sizes.split(",") if s]
    solvers = [s for s in args.solvers.split(",") if s]
    params = ModelParams(
        cfg.model.j_par, cfg.model.j_perp, cfg.model.dmi_magnitude, cfg.model.dmi_mode, b_z=1.0
    )
    report = run_benchmark(
        sizes,
        solvers,
        args.repetitions,
        params,
        vqe_config=VqeConfig(**dict(cfg.vqe.to_dict(), restarts=1)),
        exact_config=cfg.exact,
        timeout=args.timeout,
    )
    out = Path(cfg.output.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.txt").write_text(report.to_text(), encoding="utf-8")
        (out / "bench.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write benchmark report under {out}: {exc}") from exc
    print(report.to_text(), end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    handler = {"sweep": cmd_sweep, "pattern": cmd_pattern, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
