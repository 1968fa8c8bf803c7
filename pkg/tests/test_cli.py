import io
import json
import subprocess
import sys

import jsonschema
import pytest
from referencing import Registry, Resource

from supersinglet import load_schema
from supersinglet.cli import run

SMALL_RUNS = {
    "state": ["--N", "3"],
    "invariance": ["--N", "3", "--trials", "10"],
    "bell-max": ["--N", "3", "--m", "1", "--seed", "7"],
    "corr-check": ["--N", "4", "--m", "2", "--trials", "5"],
    "sample": ["--N", "3", "--trials", "50"],
    "table": ["--N", "3", "--L", "20"],
    "nsp": ["--N", "4", "--L", "50"],
    "ssp": ["--N", "4", "--L", "50", "--dishonest", "2"],
    "ldp": ["--L", "300", "--trials", "20", "--liar", "B"],
    "dtest": ["--L", "200", "--trials", "5", "--q", "0.05"],
    "df": ["--N", "8"],
}


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def validator(name):
    transcript = load_schema("ldp_transcript")
    registry = Registry().with_resource(transcript["$id"], Resource.from_contents(transcript))
    return jsonschema.Draft202012Validator(load_schema(name), registry=registry)


@pytest.mark.parametrize("command", sorted(SMALL_RUNS))
def test_output_validates_against_schema(command):
    code, out, err = invoke([command] + SMALL_RUNS[command])
    assert code == 0, err
    doc = json.loads(out)
    assert doc["command"] == command and doc["schema_version"] == "1.0"
    validator(command).validate(doc)
    assert err.startswith(command)


@pytest.mark.parametrize("command", sorted(SMALL_RUNS))
def test_output_is_byte_reproducible(command):
    argv = [command] + SMALL_RUNS[command] + ["--seed", "11"]
    assert invoke(argv)[1] == invoke(argv)[1]


@pytest.mark.parametrize("command", ["table", "ldp", "df", "bell-max"])
def test_csv_output(command):
    code, out, _ = invoke([command] + SMALL_RUNS[command] + ["--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) >= 2 and "," in lines[0]


def test_bell_max_n3():
    doc = json.loads(invoke(["bell-max", "--N", "3", "--m", "1", "--seed", "7"])[1])
    assert abs(doc["value"] - 2.552) < 1e-3


def test_state_nn3_signs():
    doc = json.loads(invoke(["state", "--family", "NN", "--N", "3"])[1])
    sign = {}
    for idx, (re, im) in enumerate(doc["amplitudes"]):
        assert im == 0
        if abs(re) > 1e-12:
            sign[(idx // 9, idx // 3 % 3, idx % 3)] = 1 if re > 0 else -1
    assert sign == {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}


def test_ldp_b_liar_example():
    code, out, _ = invoke(["ldp", "--liar", "B", "--L", "3000", "--trials", "1000", "--seed", "1"])
    doc = json.loads(out)
    assert code == 0
    assert doc["verdict_counts"]["B-lies"] / 1000 >= 0.99


def test_exit_codes():
    with pytest.raises(SystemExit) as exc:
        invoke(["bogus"])
    assert exc.value.code == 1
    assert invoke(["state", "--N", "9"])[0] == 2
    assert invoke(["state", "--N", "9", "--cap", "6"])[0] == 2
    assert invoke(["df", "--N", "3"])[0] == 1
    assert invoke(["corr-check", "--N", "3", "--m", "2"])[0] == 1
    assert invoke(["ldp", "--trials", "0"])[0] == 1


def test_console_script_usage_on_stderr():
    proc = subprocess.run(
        [sys.executable, "-m", "supersinglet.cli", "nonsense"], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert "usage" in proc.stderr and proc.stdout == ""
