from __future__ import annotations

import json

import pytest

from odsched.catalog import builtin_catalog, load_trace, save_catalog, save_trace
from odsched.cli import main
from odsched.sim import demo_scenario, gen_trace


@pytest.fixture(scope="module")
def trace_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "demo.ndjson"
    save_trace(gen_trace(demo_scenario(), 0), path)
    return str(path)


def test_build_graph_defaults(tmp_path, trace_file, capsys):
    out = tmp_path / "pm.json"
    code = main(["build-graph", "--trace", trace_file, "--out", str(out)])
    assert code == 0
    assert out.exists()
    doc = json.loads(out.read_text())
    assert doc["bucket_width"] == 0.1 and doc["distance_threshold"] == 0.5
    printed = capsys.readouterr().out
    assert "nodes" in printed and "entries" in printed


def test_build_graph_bad_bucket_width_fails_before_io(tmp_path, trace_file):
    out = tmp_path / "pm.json"
    code = main(["build-graph", "--trace", trace_file, "--bucket-width", "0", "--out", str(out)])
    assert code != 0
    assert not out.exists()


def test_build_graph_unreadable_trace(tmp_path, capsys):
    out = tmp_path / "pm.json"
    code = main(["build-graph", "--trace", "/does/not/exist.ndjson", "--out", str(out)])
    assert code != 0
    assert "/does/not/exist.ndjson" in capsys.readouterr().err


def test_simulate_shift_stock_defaults(tmp_path, trace_file, capsys):
    out = tmp_path / "report.json"
    frames_csv = tmp_path / "frames.csv"
    plot_csv = tmp_path / "timeline.csv"
    code = main(
        [
            "simulate",
            "--trace", trace_file,
            "--policy", "shift",
            "--accuracy-threshold", "0.25",
            "--momentum", "30",
            "--distance", "0.5",
            "--w-acc", "1.0",
            "--w-energy", "0.5",
            "--w-latency", "0.5",
            "--out", str(out),
            "--frames-csv", str(frames_csv),
            "--plot", str(plot_csv),
        ]
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["policy"] == "shift"
    assert report["config"]["momentum"] == 30
    header = frames_csv.read_text().splitlines()[0]
    assert header == "frame,model,accelerator,iou,confidence,latency_s,energy_j,swap"
    assert plot_csv.read_text().splitlines()[0] == "frame,model,accelerator,iou,energy_j"
    assert "IoU" in capsys.readouterr().out


def test_simulate_prefill_flag(tmp_path, trace_file):
    out = tmp_path / "prefill.json"
    code = main(["simulate", "--trace", trace_file, "--prefill", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["total_load_time_s"] == 0.0


def test_build_graph_min_samples_prunes(tmp_path, trace_file):
    dense = tmp_path / "dense.json"
    sparse = tmp_path / "sparse.json"
    assert main(["build-graph", "--trace", trace_file, "--out", str(dense)]) == 0
    assert main(
        ["build-graph", "--trace", trace_file, "--min-samples", "10", "--out", str(sparse)]
    ) == 0
    n_dense = len(json.loads(dense.read_text())["nodes"])
    n_sparse = len(json.loads(sparse.read_text())["nodes"])
    assert n_sparse < n_dense


def test_simulate_single_has_zero_swaps(tmp_path, trace_file):
    out = tmp_path / "single.json"
    code = main(
        ["simulate", "--trace", trace_file, "--policy", "single:yolov7:gpu", "--out", str(out)]
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["model_swaps"] == 0
    assert report["pairs_used"] == 1


def test_simulate_incompatible_single_pair(tmp_path, trace_file):
    out = tmp_path / "bad.json"
    code = main(
        ["simulate", "--trace", trace_file, "--policy", "single:yolov7-e6e:oakd", "--out", str(out)]
    )
    assert code != 0


def test_simulate_bad_policy_string(tmp_path, trace_file):
    code = main(
        ["simulate", "--trace", trace_file, "--policy", "warp", "--out", str(tmp_path / "x.json")]
    )
    assert code != 0


def test_oracle_e_minimizes_energy_among_oracles(tmp_path, trace_file):
    energies = {}
    for name in ("oracle-e", "oracle-a", "oracle-l"):
        out = tmp_path / f"{name}.json"
        assert main(["simulate", "--trace", trace_file, "--policy", name, "--out", str(out)]) == 0
        energies[name] = json.loads(out.read_text())["avg_energy_j"]
    assert energies["oracle-e"] <= energies["oracle-a"]
    assert energies["oracle-e"] <= energies["oracle-l"]


def test_simulate_with_prebuilt_graph_matches_inline(tmp_path, trace_file):
    pm_path = tmp_path / "pm.json"
    assert main(["build-graph", "--trace", trace_file, "--out", str(pm_path)]) == 0
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    assert main(["simulate", "--trace", trace_file, "--out", str(out1)]) == 0
    assert main(
        ["simulate", "--trace", trace_file, "--graph", str(pm_path), "--out", str(out2)]
    ) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_two_by_two(tmp_path, trace_file, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"w_accuracy": [0.5, 1.0], "w_energy": [0.0, 1.0]}))
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--trace", trace_file, "--grid", str(grid), "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 4  # header + product of range sizes
    summary = json.loads((tmp_path / "sweep.csv.summary.json").read_text())
    assert set(summary) == {"w_accuracy", "w_energy"}
    assert "spearman" in capsys.readouterr().out


def test_sweep_missing_grid_file(tmp_path, trace_file):
    code = main(
        ["sweep", "--trace", trace_file, "--grid", str(tmp_path / "nope.json"),
         "--out", str(tmp_path / "s.csv")]
    )
    assert code != 0


def test_gen_trace_round_trips_through_loader(tmp_path):
    out = tmp_path / "t.ndjson"
    assert main(["gen-trace", "--seed", "3", "--out", str(out)]) == 0
    trace = load_trace(out, builtin_catalog())
    assert len(trace) == 300


def test_gen_trace_byte_identical_for_same_seed(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.ndjson", "b.ndjson", "c.ndjson"))
    assert main(["gen-trace", "--seed", "7", "--out", str(a)]) == 0
    assert main(["gen-trace", "--seed", "7", "--out", str(b)]) == 0
    assert main(["gen-trace", "--seed", "8", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_gen_trace_malformed_scenario_names_field(tmp_path, capsys):
    spec = tmp_path / "scenario.json"
    spec.write_text(json.dumps({"segments": [{"models": {"a": {}}}]}))
    code = main(["gen-trace", "--scenario", str(spec), "--out", str(tmp_path / "t.ndjson")])
    assert code != 0
    assert "frames" in capsys.readouterr().err


def test_env_var_overrides_default_catalog(tmp_path, trace_file, monkeypatch):
    # a catalog without yolov7 makes the single baseline unresolvable,
    # proving the env-pointed file was actually loaded
    cat = builtin_catalog()
    from odsched.catalog import Catalog

    reduced = Catalog(
        accelerators=cat.accelerators,
        models=tuple(m for m in cat.models if m != "yolov7"),
        compatibility=frozenset(p for p in cat.compatibility if p[0] != "yolov7"),
        profiles={p: v for p, v in cat.profiles.items() if p[0] != "yolov7"},
    )
    cat_path = tmp_path / "reduced.json"
    save_catalog(reduced, cat_path)
    monkeypatch.setenv("ODSCHED_CATALOG", str(cat_path))
    code = main(
        ["simulate", "--trace", trace_file, "--policy", "single:yolov7:gpu",
         "--out", str(tmp_path / "r.json")]
    )
    assert code != 0
    monkeypatch.delenv("ODSCHED_CATALOG")
    code = main(
        ["simulate", "--trace", trace_file, "--policy", "single:yolov7:gpu",
         "--out", str(tmp_path / "r.json")]
    )
    assert code == 0
