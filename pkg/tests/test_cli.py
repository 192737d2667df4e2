import csv
import json
import subprocess
import sys

import pytest

from riskrank.cli import main, parse_range
from riskrank.errors import ConfigError
from riskrank.simharness.scenario import DEFAULT_SCENARIO


@pytest.fixture
def small_scenario(tmp_path):
    data = json.loads(DEFAULT_SCENARIO.read_text())
    data["days"] = 3
    data["trials_per_day"] = 5
    for name in ("location", "time", "social"):
        (tmp_path / f"{name}.json").write_text((DEFAULT_SCENARIO.parent / f"{name}.json").read_text())
    path = tmp_path / "small.json"
    path.write_text(json.dumps(data))
    return path


def test_run(small_scenario, tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert main(["run", "--scenario", str(small_scenario), "--out", str(out), "--seeds", "1,2"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 * 3 * 2
    assert {r["arm"] for r in rows} == {"full", "rm", "baseline"}
    assert "wrote 18 rows" in capsys.readouterr().out


def test_run_arm_subset(small_scenario, tmp_path):
    out = tmp_path / "m.csv"
    assert main(["run", "--scenario", str(small_scenario), "--out", str(out), "--seeds", "1",
                 "--arms", "baseline"]) == 0
    assert {r["arm"] for r in csv.DictReader(out.open())} == {"baseline"}


def test_validate_default(capsys):
    assert main(["validate", "--scenario", "default"]) == 0
    assert capsys.readouterr().out.strip().endswith("ok")


def test_grid(small_scenario, tmp_path):
    out = tmp_path / "g.csv"
    assert main(["grid", "--scenario", str(small_scenario), "--param", "B=0.8:0.9:0.05",
                 "--out", str(out), "--seeds", "1"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [float(r["value"]) for r in rows] == [0.8, 0.85, 0.9]
    assert {r["arm"] for r in rows} == {"full"}


@pytest.mark.parametrize("argv", [
    ["validate", "--scenario", "/nonexistent.json"],
    ["run", "--scenario", "default", "--out", "x.csv", "--arms", "greedy"],
    ["grid", "--scenario", "default", "--param", "lambda=1:2:1", "--out", "x.csv"],
])
def test_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_parse_range():
    assert parse_range("alpha=1,2.5") == ("alpha", [1.0, 2.5])
    assert parse_range("epsilon_max=0.2:0.4:0.1") == ("epsilon_max", [0.2, 0.3, 0.4])
    for bad in ("B", "B=0.9:0.1:0.1", "B=0.1:0.9:0", "B=a:b:c"):
        with pytest.raises(ConfigError):
            parse_range(bad)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "riskrank.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "grid" in proc.stdout
