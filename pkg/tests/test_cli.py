import json
import subprocess
import sys

import pytest

from crdtkit.cli import main
from crdtkit.simulator.scenario import SCENARIO_DIR


def scenario(name):
    return str(SCENARIO_DIR / f"{name}.json")


def test_run_ok(capsys, tmp_path):
    out = tmp_path / "t.log"
    assert main(["run", scenario("fig1_awset"), "--trace", str(out)]) == 0
    assert "ok: {'a'}" in capsys.readouterr().out
    first = out.read_text().splitlines()[0].split("\t")
    assert first[:2] == ["1", "update-applied"]


def test_run_with_seed(capsys):
    assert main(["run", scenario("bcounter_escrow"), "--seed", "99"]) == 0


def test_oracle(capsys):
    assert main(["oracle", scenario("fig1_rwset")]) == 0
    assert capsys.readouterr().out.strip() == "{}"
    assert main(["oracle", scenario("fig2_awset")]) == 0
    assert capsys.readouterr().out.strip() == "{'a','b'}"


def test_fuzz(capsys):
    args = ["fuzz", "--type", "awset", "--model", "delta", "--replicas", "3", "--ops", "10", "--runs", "5",
            "--seed", "1"]
    assert main(args) == 0
    assert "all runs passed" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["fuzz", "--type", "awset", "--model", "op"],
    ["fuzz", "--type", "nope"],
    ["fuzz", "--type", "awset", "--replicas", "0"],
    ["run", "/nonexistent.json"],
    ["frobnicate"],
    [],
])
def test_invalid_input_exit_code(argv, capsys):
    assert main(argv) == 2


def test_invalid_scenario_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"crdt": "awset", "replicas": ["A"], "script": [{"at": "B", "do": "query"}]}))
    assert main(["run", str(p)]) == 2
    p.write_text("{not json")
    assert main(["run", str(p)]) == 2


def test_divergence_exit_code(tmp_path, monkeypatch, capsys):
    from crdtkit.simulator import types

    class Broken(types.GCounterAdapter):
        def oracle(self, history, params):
            return -1

    monkeypatch.setitem(types.ADAPTERS, "gcounter", Broken())
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"crdt": "gcounter", "replicas": ["A", "B"],
                             "script": [{"at": "A", "do": "inc"}, {"sync": "full"}]}))
    assert main(["run", str(p)]) == 1
    assert "oracle-divergence" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "crdtkit", "oracle", scenario("fig1_awset")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "{'a'}"
