import json

import numpy as np
import pytest

from phireg.cli import ConfigError, emit_csv, main, run_config, validate_config


def test_validate_config_field_paths():
    with pytest.raises(ConfigError, match="scenario"):
        validate_config({"id": "x"})
    with pytest.raises(ConfigError, match="seeds"):
        validate_config({"scenario": "conformal", "id": "x", "T": 10})
    with pytest.raises(ConfigError, match="T"):
        validate_config({"scenario": "conformal", "id": "x", "seeds": [1], "T": 0})
    with pytest.raises(ConfigError, match="checks"):
        validate_config({
            "scenario": "conformal", "id": "x", "seeds": [1], "T": 10,
            "checks": [{"name": "nope"}],
        })


def test_emit_csv_format(tmp_path):
    p = tmp_path / "a.csv"
    emit_csv([], ["a", "b"], p)
    assert p.read_text() == "a,b\n"
    emit_csv([{"a": 1, "b": 0.123456789012345}], ["a", "b"], p)
    lines = p.read_text().splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "1,0.123456789012"  # 12 significant digits


def test_emit_csv_byte_identical(tmp_path):
    config = {
        "scenario": "counterexample", "variant": "abs_alternating",
        "id": "abs", "T": 10, "seeds": [0], "delta": 0.25,
    }
    p1, p2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    run_config(dict(config), output=p1)
    run_config(dict(config), output=p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_abs_alternating_scenario_values():
    config = {
        "scenario": "counterexample", "variant": "abs_alternating",
        "id": "abs", "T": 100, "seeds": [0], "delta": 0.25,
    }
    records, columns, _ = run_config(config)
    final = records[-1]
    assert final["t"] == 100
    assert final["regret_external"] == 50.0
    assert final["regret_proj"] == 0.0


def test_gd_constant_stream_regret_example():
    # unit loss gradient on [-1, 1] with eta = 0.1 for three rounds
    config = {
        "scenario": "single_learner", "variant": "gd_prox", "id": "gd-const",
        "T": 3, "seeds": [0],
        "set": {"kind": "interval", "lo": -1.0, "hi": 1.0},
        "loss_stream": {"kind": "constant_linear", "g": [1.0]},
        "learner": {"kind": "gd", "eta": 0.1},
        "deviations": [{"family": "prox_family", "auto": 12}],
    }
    records, _, _ = run_config(config)
    assert np.isclose(records[-1]["regret_external"], 2.7)


def test_conformal_scenario_gap_column():
    config = {
        "scenario": "conformal", "variant": "synthetic", "id": "conf",
        "T": 200, "seeds": [3], "alpha": 0.1, "eta": 0.05,
    }
    records, _, _ = run_config(config)
    for row in records:
        assert np.isclose(row["gap"], row["drift"], atol=1e-12)


def test_run_config_unknown_variant():
    with pytest.raises(ConfigError, match="variant"):
        run_config({"scenario": "single_learner", "variant": "nope", "id": "x",
                    "T": 1, "seeds": [0]})


def test_checks_execute_and_fail(tmp_path):
    config = {
        "scenario": "counterexample", "variant": "abs_alternating",
        "id": "abs", "T": 10, "seeds": [0], "delta": 0.25,
        "checks": [{"name": "exact_values", "params": {"expect": {
            "proj.total": {"value": 123.0, "tol": 1e-12}}}}],
    }
    _, _, checks = run_config(config, check=True)
    assert checks and not checks[0][1]


def test_main_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({
        "scenario": "counterexample", "variant": "abs_alternating",
        "id": "abs", "T": 10, "seeds": [0], "delta": 0.25,
        "checks": [{"name": "exact_values", "params": {"expect": {
            "proj.total": {"value": 0.0, "tol": 1e-12}}}}],
        "output": str(tmp_path / "abs.csv"),
    }))
    assert main(["run", str(good), "--check"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert (tmp_path / "abs.csv").exists()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "nope", "id": "x", "seeds": [1]}))
    assert main(["run", str(bad)]) == 2

    failing = tmp_path / "failing.json"
    failing.write_text(json.dumps({
        "scenario": "counterexample", "variant": "abs_alternating",
        "id": "abs", "T": 10, "seeds": [0], "delta": 0.25,
        "checks": [{"name": "exact_values", "params": {"expect": {
            "proj.total": {"value": 9.0, "tol": 1e-12}}}}],
    }))
    assert main(["run", str(failing), "--check"]) == 4
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_audit_subcommand(tmp_path, capsys):
    traj = {
        "set": {"kind": "interval", "lo": -1.0, "hi": 1.0},
        "xs": [[0.0], [-0.1], [-0.2]],
        "gradients": [[1.0], [1.0], [1.0]],
        "loss_values": [0.0, -0.1, -0.2],
        "final_x": [-0.3],
        "loss": {"kind": "linear"},
    }
    tpath = tmp_path / "traj.json"
    tpath.write_text(json.dumps(traj))
    dpath = tmp_path / "devs.json"
    dpath.write_text(json.dumps({"deviations": [
        {"family": "external"},
        {"family": "int", "delta": 0.5},
        {"family": "finite", "members": ["identity", "zero"]},
    ]}))
    assert main(["audit", str(tpath), str(dpath)]) == 0
    out = capsys.readouterr().out
    assert "external: total=2.7" in out
    assert "exactness=exact" in out


def test_hardness_subcommand(tmp_path, capsys):
    gpath = tmp_path / "g.txt"
    gpath.write_text("3\n0 1\n1 2\n0 2\n")
    assert main(["hardness", str(gpath), "--k", "2", "--delta", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "omega=3" in out


def test_conformal_subcommand(tmp_path, capsys):
    spath = tmp_path / "scores.csv"
    spath.write_text("\n".join(str(-1.0) for _ in range(10)) + "\n")
    assert main(["conformal", str(spath), "--alpha", "0.1", "--eta", "0.1"]) == 0
    out = capsys.readouterr().out
    assert "gap=0.1" in out


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "gd-prox-ball-d5" in out


def test_thread_fanout_preserves_seed_order(monkeypatch):
    monkeypatch.setenv("PHIREG_THREADS", "4")
    config = {
        "scenario": "conformal", "variant": "synthetic", "id": "conf",
        "T": 50, "seeds": [5, 3, 9], "alpha": 0.1, "eta": 0.05,
    }
    records, _, _ = run_config(config)
    seeds_in_order = [r["seed"] for r in records]
    boundaries = [s for i, s in enumerate(seeds_in_order) if i == 0 or seeds_in_order[i - 1] != s]
    assert boundaries == [5, 3, 9]


def test_numerical_error_exit_code(tmp_path, monkeypatch):
    from phireg import cli
    from phireg.deviations import NumericalError

    def boom(config, seed):
        raise NumericalError("solver stalled", residual=1.0)

    monkeypatch.setitem(cli._RUNNERS, ("conformal", "synthetic"), (boom, ["scenario", "seed", "t"]))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "scenario": "conformal", "variant": "synthetic", "id": "x",
        "T": 10, "seeds": [0], "alpha": 0.1, "eta": 0.1,
    }))
    assert main(["run", str(cfg)]) == 3


def test_deviation_config_round_trip():
    from phireg.deviations import deviation_set_from_config
    from phireg.geometry import Interval

    fam = deviation_set_from_config({
        "family": "prox_family",
        "members": [
            {"kind": "linear", "v": [0.1]},
            {"kind": "quad_to_anchor", "lam": 0.3, "anchor": [0.0]},
            {"kind": "indicator", "subset": {"kind": "interval", "lo": -0.5, "hi": 0.5}},
            {"kind": "symmetric_affine", "A": [[0.8]], "b": [0.0]},
        ],
    }, Interval(-1, 1))
    assert len(fam.members()) == 4
    for bad in ({"family": "nope"}, {"family": "finite", "members": [{"kind": "nope"}]}):
        with pytest.raises(ConfigError if False else ValueError):
            deviation_set_from_config(bad)


def test_audit_subcommand_prox_family(tmp_path, capsys):
    traj = {
        "set": {"kind": "interval", "lo": -1.0, "hi": 1.0},
        "xs": [[0.5], [-0.5]],
        "gradients": [[1.0], [-1.0]],
        "loss_values": [0.5, 0.5],
        "loss": {"kind": "abs1d", "kinks": [0.0]},
    }
    tpath = tmp_path / "traj.json"
    tpath.write_text(json.dumps(traj))
    dpath = tmp_path / "devs.json"
    dpath.write_text(json.dumps({"deviations": [
        {"family": "proj", "delta": 0.25},
        {"family": "prox_family", "members": [{"kind": "linear", "v": [0.25]}]},
    ]}))
    assert main(["audit", str(tpath), str(dpath)]) == 0
    out = capsys.readouterr().out
    assert "proj: total=0" in out
    assert "prox_family: total=0" in out


def test_conformal_all_covered_gap_example():
    config = {
        "scenario": "conformal", "variant": "synthetic", "id": "conf-covered",
        "T": 10, "seeds": [0], "alpha": 0.1, "eta": 0.1,
        "stream": {"kind": "always_covered"},
    }
    records, _, _ = run_config(config)
    assert np.isclose(records[-1]["gap"], 0.1)
