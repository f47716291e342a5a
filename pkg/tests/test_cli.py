"""End-to-end command-line interface tests on a miniature configuration."""

import json

import pytest

from lsmlab import cli
from lsmlab.dataset import load_dataset

MINI_CONFIG = {
    "seed": 5,
    "dataset": {"synthetic": {
        "n_classes": 3, "n_channels": 6, "samples_per_class": 4,
        "duration_ms": 200.0, "n_segments": 4, "n_groups": 3,
        "rate_hi_hz": 150.0, "n_twin_pairs": 0, "seed": 7,
    }},
    "reservoir": {"params": {"n_neurons": 27, "grid": [3, 3, 3], "lambda": 2.0, "seed": 5},
                  "n_channels": 6, "fan_out": 4},
    "kernel": {"order": "zeroth", "tau_fall_ms": 4.0},
    "readout": {"n_classes": 3},
    "sweep": {"alpha_in_values": [4.0, 8.0], "alpha_res_values": [0.5, 1.0],
              "n_folds": 3, "orders": ["zeroth"], "taus": [2.0], "band_n": 2},
}


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(MINI_CONFIG))
    return str(path)


def test_gen_data(config_path, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["gen-data", "-c", config_path, "-o", str(out)]) == 0
    dataset = load_dataset(out / "dataset")
    assert len(dataset) == 12
    report = json.loads((out / "validation_report.json").read_text())
    assert report["violations"] == []
    assert "config_hash" in report["provenance"]


def test_gen_reservoir_and_reuse(config_path, tmp_path):
    out = tmp_path / "res"
    assert cli.main(["gen-reservoir", "-c", config_path, "-o", str(out)]) == 0
    doc = json.loads((out / "reservoir.json").read_text())
    assert len(doc["graph"]["is_excitatory"]) == 27
    # a run that loads the saved topology matches one that rebuilds it
    reuse = json.loads(json.dumps(MINI_CONFIG))
    reuse["reservoir"]["file"] = str(out / "reservoir.json")
    reuse_path = tmp_path / "reuse.json"
    reuse_path.write_text(json.dumps(reuse))
    assert cli.main(["run", "-c", config_path, "-o", str(tmp_path / "a")]) == 0
    assert cli.main(["run", "-c", str(reuse_path), "-o", str(tmp_path / "b")]) == 0
    a = json.loads((tmp_path / "a" / "result.json").read_text())
    b = json.loads((tmp_path / "b" / "result.json").read_text())
    assert a["fold_accuracies"] == b["fold_accuracies"]
    assert a["per_sample_spikes"] == b["per_sample_spikes"]


def test_run_outputs(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", "-c", config_path, "-o", str(out), "--rasters"]) == 0
    result = json.loads((out / "result.json").read_text())
    assert len(result["fold_accuracies"]) == 3
    assert 0.0 <= result["mean_accuracy"] <= 1.0
    assert len(result["per_sample_spikes"]) == 12
    assert (out / "folds.csv").read_text().startswith("fold,accuracy")
    rasters = sorted((out / "rasters").iterdir())
    assert len(rasters) == 12
    assert "accuracy" in capsys.readouterr().out


def test_sweep_outputs_and_determinism(config_path, tmp_path):
    for name, extra in (("s1", []), ("s2", []), ("s3", ["--threads", "2"])):
        assert cli.main(["sweep", "-c", config_path, "-o", str(tmp_path / name)] + extra) == 0
    base = (tmp_path / "s1" / "grid.json").read_bytes()
    assert (tmp_path / "s2" / "grid.json").read_bytes() == base  # rerun
    assert (tmp_path / "s3" / "grid.json").read_bytes() == base  # thread count
    summary = json.loads((tmp_path / "s1" / "summary.json").read_text())
    assert "optimum" in summary and "lowest_error_band" in summary
    grid_csv = (tmp_path / "s1" / "grid.csv").read_text()
    assert grid_csv.startswith("alpha_in,alpha_res,activity,mean_error,std_error")
    assert len(grid_csv.strip().splitlines()) == 5  # header + 2x2 grid


def test_analyze_reads_grid(config_path, tmp_path):
    assert cli.main(["sweep", "-c", config_path, "-o", str(tmp_path / "s")]) == 0
    grid = str(tmp_path / "s" / "grid.json")
    assert cli.main(["analyze", grid, "-o", str(tmp_path / "an"), "--band-n", "2"]) == 0
    analysis = json.loads((tmp_path / "an" / "analysis.json").read_text())
    assert analysis["lowest_error_band"]["n"] == 2
    assert (tmp_path / "an" / "error_vs_activity.csv").exists()
    # a non-grid file is a validation error
    assert cli.main(["analyze", str(tmp_path / "s" / "summary.json"),
                     "-o", str(tmp_path / "an2")]) == 1


def test_timescale_sweep(config_path, tmp_path):
    out = tmp_path / "ts"
    assert cli.main(["timescale-sweep", "-c", config_path, "-o", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert [c["order"] for c in summary["cells"]] == ["zeroth"]
    text = (out / "timescale.csv").read_text()
    assert text.startswith("order,tau,min_error")


def test_fixed_point(config_path, tmp_path):
    out = tmp_path / "fp"
    assert cli.main(["fixed-point", "-c", config_path, "-o", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["operating_point"] == {"alpha_in": 6.0, "alpha_res": 1.0}
    assert [c["order"] for c in summary["cells"]] == ["zeroth"]


def test_cost_command(tmp_path, capsys):
    assert cli.main(["cost", "second", "-o", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "1000x" in out and "higher_order" in out
    report = json.loads((tmp_path / "cost.json").read_text())
    assert report["benefit"]["driver_power"] == 1000.0
    assert cli.main(["cost", "zeroth"]) == 0


def test_seed_and_set_overrides(config_path, tmp_path):
    assert cli.main(["run", "-c", config_path, "-o", str(tmp_path / "a")]) == 0
    assert cli.main(["run", "-c", config_path, "-o", str(tmp_path / "b"),
                     "--seed", "9"]) == 0
    assert cli.main(["run", "-c", config_path, "-o", str(tmp_path / "c"),
                     "--set", "sweep.fixed_alpha_in=12"]) == 0
    a = json.loads((tmp_path / "a" / "result.json").read_text())
    b = json.loads((tmp_path / "b" / "result.json").read_text())
    c = json.loads((tmp_path / "c" / "result.json").read_text())
    # the run seed only shuffles folds once the topology seed is pinned
    assert a["per_sample_spikes"] == b["per_sample_spikes"]
    assert c["alpha_in"] == 12
    assert c["per_sample_spikes"] != a["per_sample_spikes"]


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert cli.main(["run", "-c", str(bad), "-o", str(tmp_path / "x")]) == 1
    assert "error" in capsys.readouterr().err

    missing_data = tmp_path / "missing.json"
    missing_data.write_text(json.dumps({"dataset": {"path": str(tmp_path / "nowhere")}}))
    assert cli.main(["run", "-c", str(missing_data), "-o", str(tmp_path / "y")]) == 2

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(MINI_CONFIG))
    assert cli.main(["run", "-c", str(cfg), "-o", str(tmp_path / "z"),
                     "--set", "sweep.n_folds=100"]) == 1  # more folds than samples
