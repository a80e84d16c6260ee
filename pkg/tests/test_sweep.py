import itertools
import json
import math

import numpy as np
import pytest

from qskyrmion.exact import dense_ground
from qskyrmion.hamiltonian import ModelParams, model_hamiltonian
from qskyrmion.lattice import LatticeSpec
from qskyrmion.sweep import (
    CSV_HEADER,
    ConfigError,
    OutputError,
    RunConfig,
    SweepRange,
    SweepRecord,
    detect_transition,
    field_grid,
    fit_power_law,
    format_csv,
    load_config,
    load_manifest,
    read_csv,
    run_benchmark,
    run_sweep,
    write_outputs,
)

BENCH_SIZES = [7, 9, 16, 19]


def records(bs, qs, es=None):
    es = es if es is not None else [-b for b in bs]
    return [SweepRecord(b, e, q, 0.0, 0.0, -b, "lanczos") for b, q, e in zip(bs, qs, es)]


def config(tmp_path=None, **kw):
    d = {
        "lattice": {"kind": "square", "nx": 2, "ny": 2},
        "model": {"j_par": -1.0, "j_perp": 0.5, "dmi_magnitude": 1.0, "dmi_mode": "parallel"},
        "sweep": {"start": 0.0, "stop": 0.6, "step": 0.2},
        "solver": {"name": "dense"},
        "output": {"dir": str(tmp_path or "runs/test"), "fields_at": [0.2], "record_timing": False},
        "rng_seed": 3,
    }
    for key, value in kw.items():
        d[key] = value
    return RunConfig.from_dict(d)


def test_field_grid():
    assert field_grid(1.5, 2.2, 0.01)[-1] == 2.2
    assert len(field_grid(1.5, 2.2, 0.01)) == 71
    assert len(field_grid(0.9, 1.5, 0.01)) == 61
    assert field_grid(1.0, 1.0, 0.5) == [1.0]


def test_step_function_detected():
    bs = [round(0.1 * k, 10) for k in range(21)]
    rep = detect_transition(records(bs, [0.0 if b < 1 else 1.0 for b in bs]))
    assert rep.b_star == pytest.approx(0.95)
    assert rep.interval == (pytest.approx(0.9), pytest.approx(1.0))
    assert rep.delta_q_rel > 1e8
    assert 0.0 < rep.b_star < 2.0


def test_constant_q_gives_none():
    bs = [0.1 * k for k in range(10)]
    assert detect_transition(records(bs, [0.3] * 10)) is None


def test_smooth_q_gives_none():
    bs = [0.1 * k for k in range(10)]
    assert detect_transition(records(bs, [0.01 * b * b for b in bs])) is None


def test_too_few_records():
    with pytest.raises(ValueError):
        detect_transition(records([0, 1, 2], [0, 0, 1]))


def test_detection_scale_invariant():
    rng = np.random.default_rng(0)
    bs = [0.05 * k for k in range(30)]
    qs = list(np.cumsum(rng.uniform(0, 0.01, 30)))
    qs[17:] = [q + 0.5 for q in qs[17:]]
    a = detect_transition(records(bs, qs))
    for scale in (1e-6, 3.0, 1e5):
        b = detect_transition(records(bs, [scale * q for q in qs]))
        assert b.b_star == a.b_star


def test_jump_magnitudes_reported():
    bs = [0.1 * k for k in range(8)]
    es = [-b if b < 0.45 else -2 * b + 0.45 for b in bs]
    recs = records(bs, [0, 0, 0, 0, 0.2, 0.2, 0.2, 0.2], es)
    rep = detect_transition(recs)
    assert rep.index == 3
    assert rep.delta_e == pytest.approx(es[4] - es[3])
    assert rep.delta_m[2] == pytest.approx(-0.1)


def test_fit_exact_power():
    ns = BENCH_SIZES
    p, c = fit_power_law(ns, [n**2 for n in ns])
    assert abs(p - 2.0) < 1e-6
    assert c == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_power_law([4], [1.0])


def fake_clock(durations):
    """Clock whose consecutive start/stop pairs differ by the given durations."""
    ticks = itertools.count()
    pending = iter(durations)
    state = {"t": 0.0}

    def clock():
        if next(ticks) % 2:
            state["t"] += next(pending)
        return state["t"]

    return clock


def bench_sizes():
    return [
        LatticeSpec("triangular", shells=1),
        LatticeSpec("square", 3, 3),
        LatticeSpec("square", 4, 4),
        LatticeSpec("triangular", shells=2),
    ]


def test_benchmark_constant_time_exponent():
    solver = {"const": lambda h: 0.0}
    rep = run_benchmark(bench_sizes(), solver, repetitions=3, clock=fake_clock([0.5] * 12))
    assert abs(rep.exponents["const"]) < 0.05
    assert [c.n_sites for c in rep.cells] == BENCH_SIZES


def test_benchmark_injected_power_law():
    times = [n**2 * 1e-3 for n in BENCH_SIZES for _ in range(3)]
    rep = run_benchmark(bench_sizes(), {"sq": lambda h: 0.0}, repetitions=3, clock=fake_clock(times))
    assert abs(rep.exponents["sq"] - 2.0) < 1e-6
    text = rep.to_text()
    assert "fit sq: time ~ N^2.000" in text
    assert json.loads(json.dumps(rep.to_dict()))["exponents"]["sq"] == pytest.approx(2.0)


def test_benchmark_timeout_marks_missing():
    times = [0.1] * 3 + [0.2] * 3 + [5.0] + [0.1] * 10
    rep = run_benchmark(bench_sizes(), {"s": lambda h: 0.0}, repetitions=3, clock=fake_clock(times), timeout=1.0)
    assert [c.missing for c in rep.cells] == [False, False, True, True]
    assert "missing" in rep.to_text()
    assert "s" in rep.exponents


def test_benchmark_real_solvers_small():
    sizes = [LatticeSpec("square", 2, 2), LatticeSpec("square", 2, 3), LatticeSpec("square", 3, 3)]
    rep = run_benchmark(sizes, ["lanczos", "dense"], repetitions=3)
    assert set(rep.exponents) == {"lanczos", "dense"}
    e = {(c.solver, c.n_sites): c.energy for c in rep.cells}
    for n in (4, 6, 9):
        assert e[("lanczos", n)] == pytest.approx(e[("dense", n)], abs=1e-9)
    with pytest.raises(ConfigError):
        run_benchmark(sizes, ["lanczos"], repetitions=2)


def test_single_point_dense_sweep(tmp_path):
    cfg = config(tmp_path, sweep={"start": 0.4, "stop": 0.4, "step": 0.1})
    recs = run_sweep(cfg)
    assert len(recs) == 1
    _, h = model_hamiltonian(LatticeSpec("square", 2, 2), ModelParams(b_z=0.4))
    assert recs[0].energy == pytest.approx(dense_ground(h).energy, abs=1e-12)
    paths = write_outputs(recs, None, cfg)
    lines = paths["csv"].read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2


def test_sweep_records_ordered_and_consistent(tmp_path):
    cfg = config(tmp_path, solver={"name": "lanczos"})
    recs = run_sweep(cfg)
    assert [r.b_z for r in recs] == [0.0, 0.2, 0.4, 0.6]
    dense = run_sweep(config(tmp_path))
    for a, b in zip(recs, dense):
        assert a.energy == pytest.approx(b.energy, abs=1e-9)
        assert a.m_z == pytest.approx(b.m_z, abs=1e-6)


def test_vqe_sweep_tracks_lanczos(tmp_path):
    vqe = {"restarts": 2, "max_evals": 3000, "layers": 3}
    recs_v = run_sweep(config(tmp_path, solver={"name": "vqe", "vqe": vqe}))
    recs_l = run_sweep(config(tmp_path, solver={"name": "lanczos"}))
    for v, l in zip(recs_v, recs_l):
        assert v.energy >= l.energy - 1e-9
        assert v.energy - l.energy < 1e-2
        assert v.theta is not None


def test_refinement_adds_points(tmp_path):
    cfg = config(
        tmp_path,
        lattice={"kind": "square", "nx": 3, "ny": 2},
        sweep={"start": 0.0, "stop": 3.0, "step": 0.25, "refine_step": 0.05},
        solver={"name": "lanczos"},
    )
    coarse = config(
        tmp_path,
        lattice={"kind": "square", "nx": 3, "ny": 2},
        sweep={"start": 0.0, "stop": 3.0, "step": 0.25},
        solver={"name": "lanczos"},
    )
    base = run_sweep(coarse)
    refined = run_sweep(cfg)
    rep = detect_transition(base)
    assert rep.interval == (2.5, 2.75)
    bs = [r.b_z for r in refined]
    assert bs == sorted(bs) and len(set(bs)) == len(bs)
    extra = sorted(set(bs) - {r.b_z for r in base})
    assert extra and all(2.25 < b < 3.0 for b in extra)
    assert 2.55 in bs


def test_csv_round_trip_bit_exact(tmp_path):
    recs = [
        SweepRecord(0.1, -1 / 3, 1e-17, math.pi, -0.0, 5e-324, "vqe", True, 0.5, False),
        SweepRecord(0.2, -12.345678901234567, -0.1, 2.0, 1.0, -3.0, "lanczos"),
    ]
    p = tmp_path / "s.csv"
    p.write_text(format_csv(recs))
    back = read_csv(p)
    assert back == recs
    assert "vqe-unconverged" in p.read_text()
    assert p.read_text().endswith("\n")


def test_outputs_and_manifest_round_trip(tmp_path):
    cfg = config(tmp_path)
    recs = run_sweep(cfg)
    rep = detect_transition(recs)
    paths = write_outputs(recs, rep, cfg)
    assert load_manifest(paths["manifest"]) == cfg
    manifest = json.loads(paths["manifest"].read_text())
    assert manifest["version"]
    field_file = tmp_path / "fields" / "field_bz_0.2000.txt"
    assert len(field_file.read_text().splitlines()) == 4


def test_byte_identical_csv_for_same_config(tmp_path):
    cfg = config(tmp_path, solver={"name": "vqe", "vqe": {"restarts": 2, "max_evals": 200}})
    a = format_csv(run_sweep(cfg))
    b = format_csv(run_sweep(cfg))
    assert a == b
    c = format_csv(run_sweep(config(tmp_path, solver={"name": "lanczos"})))
    d = format_csv(run_sweep(config(tmp_path, solver={"name": "lanczos"})))
    assert c == d


def test_write_failure_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = config(blocker / "sub")
    recs = run_sweep(config(tmp_path, sweep={"start": 0.0, "stop": 0.0, "step": 1.0}))
    with pytest.raises(OutputError, match="sub"):
        write_outputs(recs, None, cfg)
    with pytest.raises(ValueError):
        write_outputs([], None, cfg)


@pytest.mark.parametrize(
    "override",
    [
        {"sweep": {"start": 1.0, "stop": 0.0, "step": 0.1}},
        {"sweep": {"start": 0.0, "stop": 1.0, "step": 0.0}},
        {"sweep": {"start": 0.0, "stop": 1.0, "step": 0.1, "refine_step": 0.5}},
        {"solver": {"name": "qmc"}},
        {"solver": {"name": "dense"}, "lattice": {"kind": "square", "nx": 4, "ny": 4}},
        {"lattice": {"kind": "square", "nx": 6, "ny": 5}},
        {"model": {"j_par": 1.0}},
        {"lattice": {"kind": "square"}},
        {"solver": {"name": "vqe", "vqe": {"optimizer": "adam"}}},
    ],
)
def test_config_errors(override):
    with pytest.raises(ConfigError):
        config(**override)


def test_seed_propagates_and_overrides(tmp_path):
    cfg = config(tmp_path).with_overrides(seed=42, solver="lanczos", out=tmp_path / "o")
    assert cfg.vqe.rng_seed == cfg.exact.rng_seed == cfg.rng_seed == 42
    assert cfg.solver == "lanczos"
    assert cfg.output.directory == str(tmp_path / "o")


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(config(tmp_path).to_dict()))
    assert load_config(good) == config(tmp_path)


def test_sweep_range_validation():
    with pytest.raises(ConfigError):
        SweepRange(0.0, 1.0, -0.1)
