"""
配置层与命令行端到端
"""
import json
from pathlib import Path

import pytest

from main import EXIT_ERROR, EXIT_OK, EXIT_VERDICT, main
from src.core.config import OUTPUT_ROOT_ENV, Config
from src.core.errors import ConfigError
from src.core.models import parse_run_config
from src.plugins.artifacts import read_table, read_verdicts

SMALL = {
    "params": {"dimensionless": {"eps": 0.2, "gamma": 1.0, "nu": 0.25, "alpha": 0.9}},
    "grid": {"nx": 8, "nz": 4},
    "time": {"t_final": 0.5, "nsteps": 2, "scheme": "be"},
    "scenario": {"name": "zero"},
    "sweep": {"eps": [0.4, 0.2, 0.1], "workers": 2},
    "output": {"every": 1},
}


@pytest.fixture
def config_file(tmp_path, monkeypatch) -> Path:
    monkeypatch.delenv(OUTPUT_ROOT_ENV, raising=False)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(SMALL), encoding="utf-8")
    return path


def run(config_file: Path, command: str, out: Path, *extra: str) -> int:
    return main([command, "--config", str(config_file), "--output", str(out), *extra])


def body(path: Path) -> str:
    return "".join(line for line in path.read_text(encoding="utf-8").splitlines(True)
                   if not line.startswith("#"))


def test_config_get_and_set(config_file):
    cfg = Config(str(config_file))
    assert cfg.get("grid.nx") == 8
    assert cfg.get("grid.missing", 3) == 3
    cfg.set_from_string("sweep.eps=[0.3,0.1]")
    cfg.set_from_string("scenario.name=bend")
    cfg.set_from_string("solver.export_matrices=true")
    assert cfg.get("sweep.eps") == [0.3, 0.1]
    assert cfg.get("scenario.name") == "bend"
    assert cfg.get("solver.export_matrices") is True
    with pytest.raises(ConfigError):
        cfg.set_from_string("grid.nx")


def test_config_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\"grid\": ", encoding="utf-8")
    with pytest.raises(ConfigError):
        Config(str(path))


def test_output_root_from_environment(config_file, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, "/tmp/elsewhere")
    cfg = Config(str(config_file))
    assert cfg.get("output.root") == "/tmp/elsewhere"
    assert cfg.as_dict()["output"]["root"] == "/tmp/elsewhere"


@pytest.mark.parametrize("patch, key", [
    ({"params": {"physical": {"nu": 0.5}}}, "params.physical.nu"),
    ({"sweep": {"eps": [0.1, 0.2]}}, "sweep.eps"),
    ({"scenario": {"name": "twist"}}, "scenario.name"),
    ({"grid": {"nx": 8, "nz": 3}}, "grid.nz"),
])
def test_invalid_config_reports_key(patch, key):
    with pytest.raises(ConfigError) as info:
        parse_run_config({"command": "solve-limit", **patch})
    assert info.value.key == key


def test_solve_limit_zero_data(config_file, tmp_path):
    out = tmp_path / "out"
    assert run(config_file, "solve-limit", out) == EXIT_OK
    energy = out / "limit" / "energy.csv"
    first = energy.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("# config: ")
    assert json.loads(first[len("# config: "):])["grid"]["nx"] == 8
    assert (out / "limit" / "midsurface_0002.csv").exists()
    assert (out / "limit" / "pi_w_0001.csv").exists()
    verdicts = {v.criterion: v for v in read_verdicts(out / "limit" / "verdicts.txt")}
    assert verdicts["zero.limit"].passed


def test_invalid_parameter_exit_code(config_file, tmp_path):
    code = run(config_file, "solve-limit", tmp_path / "out", "--set", "params.dimensionless.nu=0.6")
    assert code == EXIT_ERROR


def test_sweep_outputs_and_determinism(config_file, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert run(config_file, "sweep-epsilon", first) == EXIT_OK
    assert run(config_file, "sweep-epsilon", second) == EXIT_OK

    for eps in ("0.4", "0.2", "0.1"):
        member = first / f"biot_eps{eps}"
        assert (member / "energy.csv").exists()
        assert (member / "verdicts.txt").exists()
    rates = read_table(first / "sweep" / "rates.csv")
    assert {r["eps_coarse"] for r in rates} == {"0.4", "0.2"}
    assert (first / "sweep" / "verdicts.txt").exists()

    for name in ("norms.csv", "stress.csv", "rates.csv"):
        assert body(first / "sweep" / name) == body(second / "sweep" / name)


def test_report_collects_verdicts(config_file, tmp_path):
    out = tmp_path / "out"
    assert run(config_file, "solve-limit", out) == EXIT_OK
    assert run(config_file, "report", out) == EXIT_OK
    summary = read_table(out / "report" / "summary.csv")
    assert {r["source"] for r in summary} == {"limit"}

    custom = out / "custom"
    custom.mkdir()
    (custom / "verdicts.txt").write_text("custom.check FAIL 1.0 0.5\n", encoding="utf-8")
    assert run(config_file, "report", out) == EXIT_OK
    assert run(config_file, "report", out, "--strict") == EXIT_VERDICT


def test_report_without_sources(config_file, tmp_path):
    assert run(config_file, "report", tmp_path / "empty") == EXIT_ERROR
