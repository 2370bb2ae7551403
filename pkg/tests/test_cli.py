import json

import pytest

from nbestkernel import ConfigError, Ensemble, ParamTuple, energy, norm
from nbestkernel.cli import TaskConfig, emit_decay_table, main, parse_config, run_task

SMALL_SPACE = {"family": "hardy", "degree": 256, "radius_cap": 0.9}

NBEST_CFG = {
    "task": "nbest",
    "space": SMALL_SPACE,
    "signal": {
        "kernel_mix": [
            {"a": [0.3, 0.0], "c": [2.0, 0.0]},
            {"a": [0.0, -0.5], "c": [1.0, 0.0]},
        ]
    },
    "n": 2,
    "optimizer": {"multistart": 4, "grid_density": 16, "seed": 11},
}


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def test_parse_minimal_config_defaults():
    cfg = parse_config(
        json.dumps(
            {
                "task": "afd",
                "space": {"family": "hardy"},
                "signal": {"coefficients": [[1.0, 0.0], [0.5, 0.0]]},
                "n": 1,
            }
        )
    )
    assert isinstance(cfg, TaskConfig)
    assert cfg.space.max_degree == 1024
    assert cfg.optimizer.delta == 0.05
    assert cfg.optimizer.seed == 0


@pytest.mark.parametrize(
    "mutate,fragment",
    [
        (lambda c: c["space"].update(param=-2.0, family="bergman"), "/space"),
        (
            lambda c: c["signal"]["kernel_mix"][0].update(a=[1.2, 0.0]),
            "/signal/kernel_mix/0/a",
        ),
        (lambda c: c.update(surprise=1), "/surprise"),
        (lambda c: c["optimizer"].update(unknown_knob=2), "/optimizer/unknown_knob"),
        (lambda c: c.update(n=-1), "/n"),
    ],
)
def test_parse_rejections_carry_paths(mutate, fragment):
    cfg = json.loads(json.dumps(NBEST_CFG))
    mutate(cfg)
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(cfg))
    assert fragment in str(err.value)


def test_parse_rejects_two_signal_forms():
    cfg = json.loads(json.dumps(NBEST_CFG))
    cfg["signal"]["coefficients"] = [[1.0, 0.0]]
    with pytest.raises(ConfigError):
        parse_config(json.dumps(cfg))


def test_parse_invalid_json():
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_nbest_task_round_trip(tmp_path):
    path = _write(tmp_path, "cfg.json", NBEST_CFG)
    cfg = parse_config(path.read_text())
    status = run_task(cfg, tmp_path)
    assert status == 0
    payload = json.loads((tmp_path / "result.json").read_text())
    assert payload["residual"] <= 1e-6 * payload["norm"]
    # re-evaluate the reported parameters from scratch
    pts = tuple(complex(re, im) for re, im in payload["parameters"])
    recomputed = energy(cfg.space, cfg.signal, ParamTuple(pts, radius_cap=0.9))
    assert recomputed == pytest.approx(payload["energy"], abs=1e-10 * max(payload["norm"] ** 2, 1))


def test_result_json_deterministic(tmp_path):
    path = _write(tmp_path, "cfg.json", NBEST_CFG)
    cfg = parse_config(path.read_text())
    run_task(cfg, tmp_path / "a")
    run_task(cfg, tmp_path / "b")
    assert (tmp_path / "a/result.json").read_bytes() == (tmp_path / "b/result.json").read_bytes()


def test_seed_override_changes_payload_seed(tmp_path):
    path = _write(tmp_path, "cfg.json", NBEST_CFG)
    cfg = parse_config(path.read_text())
    run_task(cfg, tmp_path, seed=99)
    payload = json.loads((tmp_path / "result.json").read_text())
    assert payload["seed"] == 99


def test_afd_zero_nodes_reports_signal_norm(tmp_path):
    cfg_payload = {
        "task": "afd",
        "space": SMALL_SPACE,
        "signal": {"kernel_mix": [{"a": [0.4, 0.0], "c": [1.0, 0.0]}]},
        "n": 0,
    }
    path = _write(tmp_path, "cfg.json", cfg_payload)
    cfg = parse_config(path.read_text())
    assert run_task(cfg, tmp_path) == 0
    payload = json.loads((tmp_path / "result.json").read_text())
    assert payload["energy"] == 0.0
    assert payload["residual"] == pytest.approx(norm(cfg.space, cfg.signal), rel=1e-12)


def test_decay_sweep_writes_table(tmp_path):
    cfg_payload = dict(NBEST_CFG)
    cfg_payload["n_max"] = 4
    path = _write(tmp_path, "cfg.json", cfg_payload)
    cfg = parse_config(path.read_text())
    assert run_task(cfg, tmp_path) == 0
    lines = (tmp_path / "decay.csv").read_text().strip().splitlines()
    assert lines[0] == "n,residual,energy"
    rows = [line.split(",") for line in lines[1:]]
    assert [int(r[0]) for r in rows] == [0, 1, 2, 3, 4]
    residuals = [float(r[1]) for r in rows]
    for a, b in zip(residuals, residuals[1:]):
        assert b <= a + 1e-9
    # two-kernel signal: captured exactly from n = 2 on
    assert max(residuals[2:]) <= 1e-6 * float(rows[0][1])


def test_emit_decay_table_shape():
    class Row:
        def __init__(self, residual, energy):
            self.residual = residual
            self.energy = energy

    text = emit_decay_table([Row(1.0, 0.0), Row(0.25, 0.9375)])
    assert text.splitlines()[0] == "n,residual,energy"
    assert text.splitlines()[1].startswith("0,1.0")


def test_stochastic_task(tmp_path):
    cfg_payload = {
        "task": "stochastic",
        "space": SMALL_SPACE,
        "signal": {
            "random": {
                "kind": "kernel_mix",
                "atoms": [{"a": [0.3, 0.0], "c": [1.0, 0.0]}, {"a": [-0.4, 0.0], "c": [1.0, 0.0]}],
                "M": 8,
                "seed": 7,
            }
        },
        "n": 2,
        "optimizer": {"multistart": 3, "grid_density": 16, "seed": 2},
    }
    path = _write(tmp_path, "cfg.json", cfg_payload)
    cfg = parse_config(path.read_text())
    assert isinstance(cfg.signal, Ensemble)
    assert run_task(cfg, tmp_path) == 0
    payload = json.loads((tmp_path / "result.json").read_text())
    assert payload["realizations"] == 8
    assert payload["expected_residual"] <= 1e-6 * payload["bochner_norm"]
    assert len(payload["coefficients"]) == 8


def test_stochastic_accepts_explicit_realizations(tmp_path):
    cfg_payload = {
        "task": "stochastic",
        "space": SMALL_SPACE,
        "signal": {
            "realizations": [[[1.0, 0.0], [0.5, 0.0]], [[0.0, 1.0], [0.25, 0.0]]],
            "weights": [0.25, 0.75],
        },
        "n": 1,
        "optimizer": {"multistart": 2, "grid_density": 8, "seed": 0},
    }
    path = _write(tmp_path, "cfg.json", cfg_payload)
    cfg = parse_config(path.read_text())
    assert run_task(cfg, tmp_path) == 0


def test_afd_rejects_ensemble_signal(tmp_path):
    cfg_payload = {
        "task": "afd",
        "space": SMALL_SPACE,
        "signal": {"random": {"kind": "decaying_gaussian", "gamma": 2.0, "M": 4, "seed": 1}},
        "n": 1,
    }
    cfg = parse_config(json.dumps(cfg_payload))
    with pytest.raises(ConfigError):
        run_task(cfg, tmp_path)


def test_verify_task_exit_codes(tmp_path):
    ok = parse_config(json.dumps({"task": "verify", "space": {"family": "hardy"}}))
    assert run_task(ok, tmp_path / "good") == 0
    report = json.loads((tmp_path / "good/report.json").read_text())
    assert report["all_passed"] is True
    assert all(c["passed"] for c in report["checks"])
    # the weighted family honestly fails the rim-decay flag
    bad = parse_config(
        json.dumps({"task": "verify", "space": {"family": "weighted_hardy", "param": 1.0}})
    )
    assert run_task(bad, tmp_path / "bad") == 2
    report = json.loads((tmp_path / "bad/report.json").read_text())
    failed = [c["check"] for c in report["checks"] if not c["passed"]]
    assert failed == ["boundary-vanishing"]


def test_main_subcommand_mismatch(tmp_path, capsys):
    path = _write(tmp_path, "cfg.json", NBEST_CFG)
    code = main(["afd", "--config", str(path), "--out", str(tmp_path)])
    assert code == 1
    assert "subcommand" in capsys.readouterr().err


def test_main_end_to_end(tmp_path):
    path = _write(tmp_path, "cfg.json", NBEST_CFG)
    code = main(["nbest", "--config", str(path), "--out", str(tmp_path), "--threads", "2"])
    assert code == 0
    assert (tmp_path / "result.json").exists()


def test_main_missing_config(tmp_path, capsys):
    code = main(["nbest", "--config", str(tmp_path / "absent.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err
