import json
import math

import numpy as np
import pytest

from darkfilter import cli
from darkfilter.config import (
    ConfigError,
    EngineKind,
    emit_config,
    load_preset_dict,
    parse_config,
    preset,
    validate,
)
from darkfilter.network import Topology, light_cone_ok
from darkfilter.report import CSV_COLUMNS
from darkfilter.runner import run


def test_fig1_preset():
    cfg = preset("fig1")
    net = cfg.network
    assert net.topology is Topology.DIMER_EDGE_COUPLED
    assert (net.J, net.kappas, net.delta) == (5.4, (2.0, 2.0), 1.0)
    assert cfg.input_state == ((0.6, (2, 0)), (0.4, "dark(2)"))
    assert light_cone_ok(net, cfg.z_max)


def test_fig2_preset():
    cfg = preset("fig2")
    net = cfg.network
    w1 = math.sqrt(2) * 10
    assert net.J == 10.0 and net.kappas == (2.0, 2.0, 2.0)
    assert net.omegas[0] == pytest.approx(w1) and net.omegas[2] == pytest.approx(w1)
    assert net.omegas[1] == pytest.approx(w1 - 4 / w1)
    assert net.bias == pytest.approx(w1)
    n = net.attach_sites
    assert n[1] - n[0] == 1 and n[2] - n[1] == 1
    # attachments sit mid-bath, far from both ends
    assert min(n[0] - 1, net.bath_sites - n[2]) >= net.J * cfg.z_max
    assert cfg.input_state[0] == (0.6, (1, 0, 0))


def test_z_steps_one_rejected():
    doc = load_preset_dict("fig1")
    doc["z_steps"] = 1
    with pytest.raises(ConfigError, match="z_steps"):
        validate(doc)


def test_all_violations_reported():
    doc = load_preset_dict("fig2")
    doc["z_steps"] = 1
    doc["colour"] = "blue"
    doc["network"]["J"] = "ten"
    doc["network"]["spin"] = 1
    del doc["input_state"]
    with pytest.raises(ConfigError) as err:
        validate(doc)
    text = "\n".join(err.value.errors)
    for needle in ("z_steps", "colour: unknown key", "network.J", "network.spin: unknown key",
                   "input_state: missing required key"):
        assert needle in text


def test_bad_weights_and_states():
    doc = load_preset_dict("fig1")
    doc["input_state"] = [{"weight": 0.6, "state": [2, 0]}, {"weight": 0.5, "state": "bright(2)"}]
    with pytest.raises(ConfigError) as err:
        validate(doc)
    assert any("bright" in e for e in err.value.errors)
    doc["input_state"] = [{"weight": 0.6, "state": [2, 0]}, {"weight": 0.5, "state": [1, 1]}]
    with pytest.raises(ConfigError, match="sum to"):
        validate(doc)
    doc["input_state"] = [{"weight": 1.0, "state": [1, 1, 0]}]
    with pytest.raises(ConfigError, match="occupations"):
        validate(doc)


def test_invalid_json():
    with pytest.raises(ConfigError):
        parse_config("{not json")


@pytest.mark.parametrize("name", ["fig1", "fig2"])
def test_round_trip(name):
    cfg = preset(name)
    again = parse_config(emit_config(cfg))
    assert again == cfg
    assert emit_config(again) == emit_config(cfg)


def test_overrides():
    cfg = preset("fig1", engine="markov", z_max=3.0, z_steps=11, output_path="x.csv")
    assert cfg.engine is EngineKind.MARKOV
    assert cfg.z_grid()[-1] == 3.0 and len(cfg.z_grid()) == 11
    assert cfg.network.bath_sites < preset("fig1").network.bath_sites


def test_cli_fig1_exact(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    assert cli.main(["run", "--preset", "fig1", "--engine", "exact", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    rows = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    assert rows[0, 1] == pytest.approx(0.64, abs=1e-9)
    assert rows[-1, 0] == 6.0 and rows[-1, 1] >= 0.999
    assert np.allclose(rows[:, 3], rows[:, 2] / 2)
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["initial"]["purity"] == pytest.approx(0.64)
    assert summary["convergence_length"] is not None


def test_cli_fig2_markov_summary(tmp_path):
    out = tmp_path / "fig2.csv"
    assert cli.main(["run", "--preset", "fig2", "--engine", "markov", "--out", str(out)]) == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    certs = summary["dark_certificates"]
    assert len(certs) == 1
    assert certs[0]["eigenvalue"][0] == pytest.approx(math.sqrt(2) * 10, abs=1e-9)
    assert abs(certs[0]["eigenvalue"][1]) < 1e-9
    assert summary["apt_symmetric"] is False


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert cli.main(["run", "--preset", "fig1", "--zmax", "0", "--out", str(tmp_path / "a.csv")]) == 1
    assert "z_max" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 1


def test_cli_filtering_failure_exit_code(tmp_path, capsys):
    # a lone lossy waveguide has no dark mode, so nothing survives post-selection
    doc = {
        "schema": 1,
        "network": {"topology": "side_coupled_chain", "J": 1.0, "kappas": [1.0],
                    "omegas": [0.0], "bias": 0.0, "attach_sites": [1], "bath_sites": 5},
        "input_state": [{"weight": 1.0, "state": [1]}],
        "target": [1],
        "engine": "markov",
        "z_max": 40.0,
        "z_steps": 5,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    assert cli.main(["run", "--config", str(path), "--out", str(tmp_path / "f.csv")]) == 2
    assert "filtering failure" in capsys.readouterr().err


def test_filtering_failure_from_cli(tmp_path, monkeypatch):
    from darkfilter import engines

    def boom(*args, **kwargs):
        raise engines.FilteringFailure("no dark component")

    monkeypatch.setattr("darkfilter.runner.run_sweep", boom)
    assert cli.main(["run", "--preset", "fig1", "--out", str(tmp_path / "f.csv")]) == 2


def test_cli_analyze(capsys):
    assert cli.main(["analyze", "--preset", "fig2"]) == 0
    out = capsys.readouterr().out
    assert "APT symmetric: no" in out
    assert "dark certificates: 1" in out


def test_csv_deterministic_and_plot(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["run", "--preset", "fig2", "--steps", "31", "--out", str(a), "--plot"])
    monkeypatch.setenv("DARKFILTER_THREADS", "3")
    cli.main(["run", "--preset", "fig2", "--steps", "31", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()
    png = a.with_suffix(".png")
    assert png.exists() and png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_run_without_writing():
    out = run(preset("fig1", engine="lindblad", z_max=1.0, z_steps=5), write=False)
    assert out.files == []
    assert out.summary["final"]["z"] == 1.0
