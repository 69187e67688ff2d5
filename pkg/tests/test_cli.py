import json

import pytest
from click.testing import CliRunner

from orbindex.cli import main


@pytest.fixture
def files(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return {
        "line": write("line.json", {"n": 1, "k": 1, "N": 1, "perp_eigs": [], "r": 1}),
        "half": write("half.json", {"n": 1, "k": 0, "N": 2, "perp_eigs": [1], "r": 1}),
        "third": write("third.json", {"n": 1, "k": 0, "N": 3, "perp_eigs": [1], "r": 1}),
        "unit": write("unit.json", [["1"]]),
        "pair": write("pair.json", ["y1", "y2"]),
        "gamma2": write("gamma2.json", ["y1", "h*y2"]),
        "odd": write("odd.json", ["y1"]),
        "chain": write("chain.json", [{"coef": "1/2", "u": 0, "factors": ["1", "y1", "y2"]}]),
        "broken": write("broken.json", ["y1 +"]),
        "write": write,
    }


def run(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def test_moyal(files):
    res = run("moyal", "--model", files["line"], "y1", "y2")
    assert res.exit_code == 0
    assert res.output.strip() == "y1*y2 + (1/2)*h^1"


def test_moyal_json(files):
    res = run("--format", "json", "moyal", "--model", files["line"], "y2", "y1")
    payload = json.loads(res.output)
    assert payload["text"] == "y1*y2 - (1/2)*h^1"
    assert payload["product"][0][0][-1] == {"coefficient": "-1/2", "monomial": "h^1"}


@pytest.mark.parametrize("model,expected", [("half", "(1/4)"), ("third", "(1/3)"), ("line", "u^1")])
def test_trace_of_unit(files, model, expected):
    res = run("trace", "--model", files[model])
    assert res.exit_code == 0
    assert res.output.strip() == expected


def test_trace_with_arguments(files):
    res = run("trace", "--model", files["line"], "--chain", files["unit"], "--args", files["pair"])
    assert res.output.strip() == "h^-1"


def test_correlations(files):
    free = run("correlate-free", "--model", files["line"], "--chain", files["chain"])
    assert free.exit_code == 0
    assert free.output.strip() == "(1/4)*dy1*dy2"
    inter = run("correlate-int", "--model", files["line"], "--chain", files["unit"], "--args", files["pair"])
    assert inter.exit_code == 0
    assert inter.output.strip() == "-h^-2*dy1*dy2"


def test_wheel_and_weight():
    assert run("wheel", "4").output.strip() == "1/2880"
    assert run("wheel", "6").output.strip() == "-1/181440"
    assert run("weight", "0,1", "0-1").output.strip() == "1/12"
    assert run("weight", "--size", "3").output.strip() == "1/2"
    assert run("weight", "0,0").exit_code == 2


def test_charclass(files):
    res = run("charclass", "--model", files["line"], "--args", files["gamma2"])
    assert res.exit_code == 0
    assert "agrees" in res.output
    res = run("--format", "json", "charclass", "--model", files["line"], "--args", files["pair"])
    report = json.loads(res.output)
    assert report["curvatures"][0]["R4"] == "-1"
    assert report["omega0"] == "1"
    assert report["oneloop"]["agrees"] is True
    odd = json.loads(run("--format", "json", "charclass", "--model", files["line"],
                         "--args", files["odd"]).output)
    assert "skipped" in odd["oneloop"]


def test_verify(files):
    res = run("--seed", "3", "verify", "wheels")
    assert res.exit_code == 0
    assert "seed 3" in res.output and "PASS" in res.output
    payload = json.loads(run("--format", "json", "verify", "arith", "--count", "4").output)
    assert payload["passed"] is True and payload["seed"] == 0
    assert run("verify", "bogus").exit_code == 2


def test_errors_are_reported_cleanly(files, tmp_path):
    res = run("trace", "--model", files["line"], "--args", files["broken"])
    assert res.exit_code == 1
    assert "line 1, column 5" in res.output
    bad_model = files["write"]("bad.json", {"n": 1, "k": 2, "N": 1, "perp_eigs": [], "r": 1})
    res = run("trace", "--model", bad_model)
    assert res.exit_code == 1 and "k <= n" in res.output
    noninvariant = files["write"]("z.json", ["z1"])
    res = run("trace", "--model", files["half"], "--args", noninvariant)
    assert res.exit_code == 1 and "invariant" in res.output
    (tmp_path / "junk.json").write_text("{")
    res = run("trace", "--model", str(tmp_path / "junk.json"))
    assert res.exit_code == 1 and "invalid JSON" in res.output


def test_truncation_overrides(files):
    res = run("--hbar-trunc", "1", "moyal", "--model", files["line"], "y1^2", "y2^2")
    assert "h^2" not in res.output
