import json

import numpy as np
import pytest

from entpaths.canonical import write_canonical_json
from entpaths.cli import main
from entpaths.core import StateVector, load_circuit, save_state
from entpaths.trajectories import read_trajectories


def write_config(tmp_path, name, doc):
    path = tmp_path / name
    write_canonical_json(path, doc)
    return str(path)


def read_json(path):
    return json.loads(path.read_text())


def tree_bytes(root):
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


def test_simulate_writes_the_full_artifact_set(tmp_path):
    config = write_config(tmp_path, "sim.json", {"n": 3, "r": 3, "seed": 5})
    out = tmp_path / "out"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {
        "circuit.json", "trajectory.csv", "summary.json", "manifest.json"}
    summary = read_json(out / "summary.json")
    assert summary["R"] == 3
    assert summary["measure"] == "geometric"
    runs = read_trajectories(out / "trajectory.csv")
    assert len(runs) == 1 and runs[0][0] == "run"
    assert len(runs[0][1].values) == 4
    circuit = load_circuit(out / "circuit.json")
    assert circuit.num_gates == 3
    manifest = read_json(out / "manifest.json")
    assert manifest["subcommand"] == "simulate"
    assert manifest["root_seed"] == 5
    assert manifest["config"]["n"] == 3


def test_simulate_entropy_measure_via_flags(tmp_path):
    config = write_config(tmp_path, "sim.json", {"n": 2, "r": 2, "seed": 1})
    out = tmp_path / "out"
    code = main(["simulate", "--config", config, "--out", str(out),
                 "--measure", "vonneumann", "--cut", "10"])
    assert code == 0
    summary = read_json(out / "summary.json")
    assert summary["measure"] == "vonneumann"
    assert read_json(out / "manifest.json")["config"]["cut"] == [0]


def test_simulate_entropy_without_cut_is_a_config_error(tmp_path, capsys):
    config = write_config(tmp_path, "sim.json",
                          {"n": 2, "r": 1, "seed": 1, "measure": "vonneumann"})
    code = main(["simulate", "--config", config, "--out", str(tmp_path / "x")])
    assert code == 2
    assert "cut" in capsys.readouterr().err


def test_simulate_from_circuit_file(tmp_path):
    config = write_config(tmp_path, "a.json", {"n": 2, "r": 2, "seed": 9})
    out_a = tmp_path / "a"
    main(["simulate", "--config", config, "--out", str(out_a)])
    config_b = write_config(tmp_path, "b.json", {"circuit_file": "a/circuit.json"})
    out_b = tmp_path / "b"
    assert main(["simulate", "--config", config_b, "--out", str(out_b)]) == 0
    assert (out_a / "trajectory.csv").read_bytes() == \
           (out_b / "trajectory.csv").read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    config = write_config(tmp_path, "sim.json", {"n": 2, "r": 2, "seed": 1})
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    main(["simulate", "--config", config, "--out", str(out1), "--seed", "2"])
    main(["simulate", "--config", config, "--out", str(out2)])
    assert read_json(out1 / "manifest.json")["root_seed"] == 2
    assert (out1 / "circuit.json").read_bytes() != (out2 / "circuit.json").read_bytes()


def test_unknown_config_field_is_rejected(tmp_path, capsys):
    config = write_config(tmp_path, "sim.json",
                          {"n": 2, "r": 1, "seed": 0, "typo": True})
    assert main(["simulate", "--config", config, "--out", str(tmp_path)]) == 2
    assert "typo" in capsys.readouterr().err


def test_paths_residuals_are_tiny(tmp_path):
    config = write_config(tmp_path, "p.json",
                          {"n": 3, "r": 2, "seed": 3, "q0": "101"})
    out = tmp_path / "out"
    assert main(["paths", "--config", config, "--out", str(out)]) == 0
    summary = read_json(out / "summary.json")
    assert summary["num_paths"] == 16
    assert summary["expected_paths"] == 16
    assert summary["q0"] == "101"
    assert summary["max_abs_residual"] < 1e-12
    lines = (out / "residuals.csv").read_text().splitlines()
    assert lines[0] == ("configuration,direct_re,direct_im,"
                       "path_sum_re,path_sum_im,abs_residual")
    assert len(lines) == 1 + 8


def test_paths_resource_cap_exit_code(tmp_path, capsys):
    config = write_config(tmp_path, "p.json",
                          {"n": 2, "r": 6, "seed": 0, "path_cap": 100})
    assert main(["paths", "--config", config, "--out", str(tmp_path / "x")]) == 3
    assert "4096" in capsys.readouterr().err  # the 4**R estimate


@pytest.mark.parametrize("variant,outcome", [
    ("not_x", 1), ("x", 1), ("zero", 0), ("one", 0),
])
def test_deutsch_subcommand(tmp_path, variant, outcome):
    out = tmp_path / variant
    assert main(["deutsch", "--variant", variant, "--out", str(out)]) == 0
    report = read_json(out / "report.json")
    assert report["variant"] == variant
    assert report["outcome_bit"] == outcome
    lines = (out / "interference.csv").read_text().splitlines()
    assert len(lines) == 1 + 4 * 4  # header + 4 configurations x 4 snapshots


def test_deutsch_defaults_to_not_x(tmp_path):
    out = tmp_path / "d"
    assert main(["deutsch", "--out", str(out)]) == 0
    assert read_json(out / "report.json")["variant"] == "not_x"


def test_conjecture_jobs_do_not_change_bytes(tmp_path):
    config = write_config(tmp_path, "c.json", {
        "n": 2, "targets": {"count": 2, "r_gen": 1, "seed": 7},
        "budget": {"restarts": 6, "iters": 400}, "samples_per_r": 2,
        "geo_restarts": 8, "r_max": 2})
    out1, out2 = tmp_path / "j1", tmp_path / "j2"
    assert main(["conjecture", "--config", config, "--out", str(out1),
                 "--jobs", "1"]) == 0
    assert main(["conjecture", "--config", config, "--out", str(out2),
                 "--jobs", "2"]) == 0
    assert tree_bytes(out1) == tree_bytes(out2)
    report = read_json(out1 / "report.json")
    assert report["aggregate"]["num_targets"] == 2


def test_conjecture_rerun_from_manifest(tmp_path):
    config = write_config(tmp_path, "c.json", {
        "n": 2, "targets": {"count": 1, "r_gen": 1, "seed": 2},
        "budget": {"restarts": 4, "iters": 300}, "samples_per_r": 1,
        "geo_restarts": 8, "r_max": 1})
    out1 = tmp_path / "first"
    main(["conjecture", "--config", config, "--out", str(out1)])
    out2 = tmp_path / "second"
    assert main(["conjecture", "--config", str(out1 / "manifest.json"),
                 "--out", str(out2)]) == 0
    assert tree_bytes(out1) == tree_bytes(out2)


def test_manifest_subcommand_mismatch_is_rejected(tmp_path, capsys):
    out = tmp_path / "d"
    main(["deutsch", "--out", str(out)])
    code = main(["paths", "--config", str(out / "manifest.json"),
                 "--out", str(tmp_path / "x")])
    assert code == 2
    assert "deutsch" in capsys.readouterr().err


def test_missing_config_file_is_a_config_error(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)])
    assert code == 2


def test_conjecture_file_targets_resolve_next_to_the_config(tmp_path):
    state = StateVector.from_amplitudes(np.array([1, 0, 0, 1]) / np.sqrt(2))
    save_state(state, tmp_path / "bell.json")
    config = write_config(tmp_path, "c.json", {
        "n": 2, "targets": {"files": ["bell.json"], "seed": 1},
        "budget": {"restarts": 6, "iters": 400}, "samples_per_r": 1,
        "geo_restarts": 8, "r_max": 2})
    out = tmp_path / "out"
    assert main(["conjecture", "--config", config, "--out", str(out)]) == 0
    report = read_json(out / "report.json")
    assert report["targets"][0]["r_star"] == 1


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert any("pass" in line for line in lines)
    assert not any("FAIL" in line for line in lines)
    assert "10/10" in lines[-1]
