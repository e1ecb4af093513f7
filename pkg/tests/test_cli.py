import json

import numpy as np
import pytest

from noisyqsv import cli, config, noise

SMALL = {
    "target": {"type": "stabilizer", "generators": ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ", "ZZZZZ"]},
    "noise": {"uniform_eta": 0.02},
    "epsilon": 0.05,
    "N": 500,
    "repetitions": 30,
    "seed": 7,
    "sweep_eta": [0.0, 0.02],
    "epsilons": [0.02, 0.05, 0.1],
    "deltas": [0.05, 0.2],
}
W3 = {
    "target": {"type": "w", "n": 3},
    "noise": {"random": {"range": [0, 0.3], "seed": 0}},
    "epsilon": 0.2,
    "repetitions": 10,
    "epsilons": [0.0, 0.1, 0.5, 1.0],
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.mark.parametrize("command", list(cli.COMMANDS))
def test_commands_are_byte_deterministic(tmp_path, command):
    cfg = _write(tmp_path, SMALL)
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert cli.main([command, cfg, "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1]
    assert f"{command}.json" in outs[0]
    doc = json.loads(outs[0][f"{command}.json"])
    assert doc["schema_version"] == config.SCHEMA_VERSION
    assert doc["command"] == command


def test_seed_flag_changes_simulation(tmp_path):
    cfg = _write(tmp_path, SMALL)
    cli.main(["simulate", cfg, "--out", str(tmp_path / "a")])
    cli.main(["simulate", cfg, "--seed", "8", "--out", str(tmp_path / "b")])
    a = json.loads((tmp_path / "a" / "simulate.json").read_text())
    b = json.loads((tmp_path / "b" / "simulate.json").read_text())
    assert b["summary"]["seed"] == 8
    assert a["summary"]["pass_counts"] != b["summary"]["pass_counts"]


def test_stdout_without_out(tmp_path, capsys):
    assert cli.main(["analyze", _write(tmp_path, SMALL)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["spectrum"]["lambda0"] == pytest.approx(0.92709346, abs=1e-8)
    assert doc["spectrum"]["distinguishable"]


def test_threshold_outputs(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["threshold", _write(tmp_path, W3), "--out", str(out)]) == 0
    doc = json.loads((out / "threshold.json").read_text())
    assert 0 < doc["threshold"]["epsilon_th"] < 0.3
    lines = (out / "threshold.csv").read_text().splitlines()
    assert lines[0] == "epsilon,p_eps,mu_star,gap"
    assert len(lines) == 5


def test_plan_nondistinguishable(tmp_path, capsys):
    assert cli.main(["plan", _write(tmp_path, W3)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert not doc["distinguishable"]
    assert doc["plan"]["N"] > 0 and doc["N_chernoff"] is None


def test_curve_with_explicit_parameters(tmp_path, capsys):
    cfg = {**SMALL, "lambda0": 0.9271, "nu": 0.4341}
    assert cli.main(["curve", _write(tmp_path, cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["nu"] == 0.4341
    assert set(doc["slopes"]) == {"0.05", "0.2"}


def test_histogram_csv_columns(tmp_path):
    out = tmp_path / "h"
    cli.main(["histogram", _write(tmp_path, SMALL), "--out", str(out)])
    header = (out / "histogram.csv").read_text().splitlines()[0]
    assert header == "bin_lo,bin_hi,count_h0,count_h1"


@pytest.mark.parametrize(
    "bad",
    [
        {"noise": {"uniform_eta": 0.7}},
        {"target": {"type": "cluster"}},
        {"target": {"type": "stabilizer", "generators": ["XX", "ZI"]}},
        {"epsilon": 0},
        {"mode": "fast"},
        {"N": 10**6, "repetitions": 10**4},
    ],
)
def test_bad_configs_exit_with_error(tmp_path, capsys, bad):
    assert cli.main(["analyze", _write(tmp_path, {**SMALL, **bad})]) == 2
    assert "noisyqsv analyze" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert cli.main(["analyze", str(tmp_path / "nope.json")]) == 2


def test_noise_spec_variants():
    per_qubit = config.build_noise({"per_qubit": {"eta": [[0.1, 0.1, 0.1]] * 2, "q": [[0.2, 0.1, 0.0]] * 2}}, 2)
    assert isinstance(per_qubit, noise.QubitNoiseParams) and not per_qubit.is_symmetric
    z = [[[0.05, 0], [0, 0]], [[0, 0], [-0.05, 0]]]
    minus_z = [[[-0.05, 0], [0, 0]], [[0, 0], [0.05, 0]]]
    general = config.build_noise({"general": {"lambda": [[0.9, 0.1], [0.1, 0.9]], "delta": [z, minus_z]}}, 1)
    assert isinstance(general, noise.OutcomeNoise)
    assert np.allclose(general.delta[0], np.diag([0.05, -0.05]))
    assert config.build_noise(None, 3).is_symmetric
    with pytest.raises(config.ConfigError):
        config.build_noise({"uniform_eta": 0.1, "random": {}}, 2)
    with pytest.raises(config.ConfigError):
        config.build_noise({"per_qubit": {"eta": [[0.1] * 3]}}, 2)


def test_pauli_strategy_spec():
    inst = config.build_instance(
        {"type": "ghz", "n": 3},
        {"type": "pauli", "tests": [["XXX", 0.4], ["ZZI", 0.3], ["IZZ", 0.3]]},
    )
    assert np.allclose(inst.omega @ inst.psi, inst.psi)
    with pytest.raises(config.ConfigError, match="qubits"):
        config.build_instance({"type": "ghz", "n": 3}, {"type": "pauli", "tests": [["XX", 1.0]]})


def test_config_roundtrip_keeps_extras():
    cfg = config.ExperimentConfig.from_dict({**SMALL, "lambda0": 0.9, "schema_version": 1})
    assert cfg.extra == {"lambda0": 0.9}
    assert cfg.sweep_eta == (0.0, 0.02)
    with pytest.raises(config.ConfigError):
        config.ExperimentConfig.from_dict({"epsilon": 0.1})
