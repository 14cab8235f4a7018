import csv
import json

import pytest

from ncsoliton.cli import (
    OUTPUT_ENV,
    ConfigError,
    build_parser,
    main,
    parse_window,
    resolve_config,
)
from ncsoliton.windows import Gaussian, HyperbolicSecant, TotallyPositive

THETA = 0.41421356237309515


def _resolve(argv):
    return resolve_config(build_parser().parse_args(argv))


@pytest.mark.parametrize("text, kind", [
    ("gaussian", Gaussian), ("gaussian:0.5-1i", Gaussian), ("sech", HyperbolicSecant),
    ("tp:0.5,-0.25", TotallyPositive), ("tp:0.5,-0.25:0.1", TotallyPositive),
])
def test_parse_window(text, kind):
    assert isinstance(parse_window(text, THETA), kind)


def test_parse_window_lambda():
    assert parse_window("gaussian:0.5-1i", THETA).lam == 0.5 - 1j


@pytest.mark.parametrize("text", ["", "airy", "sech:1", "tp", "tp:a,b", "gaussian:zz", "Gauss"])
def test_parse_window_rejects(text):
    with pytest.raises((ConfigError, ValueError)):
        parse_window(text, THETA)


def test_config_precedence(tmp_path, monkeypatch):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"theta": 0.3, "radius": 10, "window": "sech",
                                    "output_dir": "from-file", "lambda": "1+2i",
                                    "tolerances": {"gauge": 1e-3}}))
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    cfg = _resolve(["gauge", "--config", str(cfg_file)])
    assert (cfg.theta, cfg.radius, cfg.window, cfg.output_dir) == (0.3, 10, "sech", "from-file")
    assert cfg.lam == 1 + 2j
    assert cfg.tolerances["gauge"] == 1e-3 and "self_dual" in cfg.tolerances

    monkeypatch.setenv(OUTPUT_ENV, "from-env")
    assert _resolve(["gauge", "--config", str(cfg_file)]).output_dir == "from-env"
    cfg = _resolve(["gauge", "--config", str(cfg_file), "--output-dir", "from-flag",
                    "--radius", "12", "--lambda", "0.5"])
    assert (cfg.output_dir, cfg.radius, cfg.lam) == ("from-flag", 12, 0.5)


def test_defaults(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    cfg = _resolve(["frame"])
    assert cfg.window == "gaussian" and cfg.radius == 16 and cfg.radius_a == "auto"
    assert cfg.theta == pytest.approx(THETA, abs=0)


@pytest.mark.parametrize("argv", [
    ["frame", "--theta", "1.0"],
    ["frame", "--theta", "-0.2"],
    ["frame", "--window", "airy"],
    ["soliton", "--radius", "1"],
])
def test_errors_exit_one(argv, tmp_path, capsys):
    assert main(argv + ["--output-dir", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_is_an_error(tmp_path):
    cfg_file = tmp_path / "bad.json"
    cfg_file.write_text(json.dumps({"thetta": 0.3}))
    assert main(["frame", "--config", str(cfg_file)]) == 1


def test_gauge_verdicts_and_determinism(tmp_path):
    out = tmp_path / "gauge"
    argv = ["gauge", "--window", "gaussian:0.5", "--radius", "8", "--output-dir", str(out)]
    assert main(argv) == 0
    first = (out / "gauge-gaussian_0.5.json").read_bytes()
    assert main(argv) == 0
    assert (out / "gauge-gaussian_0.5.json").read_bytes() == first
    doc = json.loads(first)
    assert doc["report"]["gaugeable"] is True
    assert set(doc["tau_routes"]) == {"trace", "pairing", "discrepancy", "raw_pairing"}

    assert main(argv + ["--lambda", "1.5"]) == 2
    doc = json.loads((out / "gauge-gaussian_0.5-lambda_1.5+0j.json").read_text())
    assert doc["report"]["lattice_distance"] == pytest.approx(1.0, abs=1e-8)


def test_gauge_with_monomial(tmp_path):
    argv = ["gauge", "--window", "gaussian", "--radius", "8", "--monomial", "1,1",
            "--output-dir", str(tmp_path)]
    assert main(argv) == 0
    g = json.loads((tmp_path / "gauge-gaussian-u1_1.json").read_text())["gauge"]
    assert g["monomial"] == [1, 1]
    assert g["b_law_residual"] < 1e-6
    shift = complex(g["tau_shift"]["re"], g["tau_shift"]["im"])
    assert shift == pytest.approx(-(2j * 3.141592653589793 / THETA) * (1 + 1j), abs=1e-8)


def test_soliton_outputs(tmp_path):
    assert main(["soliton", "--window", "gaussian", "--radius", "8",
                 "--output-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "soliton-gaussian.json").read_text())
    assert doc["self_dual"] is True
    assert doc["report"]["charge"] == pytest.approx(1.0, abs=1e-8)
    assert doc["config"]["schema"] == "1.0"
    with (tmp_path / "soliton-gaussian-heatmap.csv").open() as fh:
        header = next(csv.reader(fh))
    assert header == ["m", "n", "abs"]


def test_frame_output(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert main(["frame"]) == 0
    doc = json.loads((tmp_path / "frame-gaussian.json").read_text())
    assert doc["report"]["is_frame"] is True
    assert doc["report"]["lower"] > 0
