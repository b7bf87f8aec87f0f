import json

import numpy as np
import pytest

from nonherm.experiments import (EXPERIMENTS, ExperimentConfig,
                                 config_from_echo, default_config,
                                 run_experiment)

# small-but-meaningful settings per experiment for the unit suite; the
# acceptance suite runs the calibrated defaults
QUICK = {
    "single-law": dict(n=64, trials=10),
    "rigidity": dict(n_list=(32, 64, 128), trials=10),
    "two-resolvent": dict(n=64, trials=10),
    "im-two-resolvent": dict(n=64, trials=10),
    "overlap-decay": dict(n=64, trials=10),
    "variance-scaling": dict(n=128, trials=60),
    "singular-overlap": dict(n=64, trials=10),
    "zig-propagation": dict(n=48, trials=4, time_samples=4),
}


def quick_cfg(name: str, **extra) -> ExperimentConfig:
    base = default_config(name)
    from dataclasses import replace
    return replace(base, **{**QUICK[name], **extra})


def test_default_config_covers_all():
    for name in EXPERIMENTS:
        cfg = default_config(name)
        assert cfg.name == name
    with pytest.raises(ValueError):
        default_config("unknown-experiment")


def test_echo_roundtrip():
    for name in EXPERIMENTS:
        cfg = default_config(name)
        rep_cfg = config_from_echo(json.loads(json.dumps(
            __import__("nonherm.experiments",
                       fromlist=["_echo_config"])._echo_config(cfg))))
        assert rep_cfg == cfg


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_runs_and_reproduces(name):
    cfg = quick_cfg(name)
    rep1 = run_experiment(name, cfg)
    rep2 = run_experiment(name, config_from_echo(rep1.config))
    assert rep1.to_json() == rep2.to_json()
    assert rep1.name == name
    assert rep1.statistics
    assert all(np.isfinite(v) for r in rep1.records
               for v in r.observables.values() if not r.discarded)


def test_threaded_matches_serial():
    cfg = quick_cfg("single-law")
    rep_serial = run_experiment("single-law", cfg)
    from dataclasses import replace
    rep_par = run_experiment("single-law", replace(cfg, threads=4))
    # the thread count is echoed in the config, so compare statistics
    a = rep_serial.canonical_dict()["statistics"]
    b = rep_par.canonical_dict()["statistics"]
    assert a == b


def test_overrides_via_kwargs():
    rep = run_experiment("single-law", n=32, trials=5, master_seed=7)
    cfg = config_from_echo(rep.config)
    assert cfg.n == 32 and cfg.trials == 5 and cfg.master_seed == 7


def test_report_serialization(tmp_path):
    rep = run_experiment("single-law", quick_cfg("single-law", trials=5))
    jpath = tmp_path / "rep.json"
    cpath = tmp_path / "rep.csv"
    rep.write_json(jpath)
    rep.write_csv(cpath)
    loaded = json.loads(jpath.read_text())
    assert loaded == rep.canonical_dict()
    lines = cpath.read_text().strip().splitlines()
    assert len(lines) == 1 + len(rep.records)
    header = lines[0].split(",")
    assert header[:2] == ["trial", "discarded"]
    # csv floats round-trip exactly (repr)
    first = lines[1].split(",")
    key = header[2]
    assert float(first[2]) == rep.records[0].observables[key]


def test_single_law_passes_at_small_scale():
    rep = run_experiment("single-law", quick_cfg("single-law"))
    assert rep.passed


def test_zig_has_no_blowup():
    rep = run_experiment("zig-propagation", quick_cfg("zig-propagation"))
    assert "no_blowup" in rep.statistics
    assert rep.statistics["no_blowup"].passed
