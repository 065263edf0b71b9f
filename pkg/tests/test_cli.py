import json
from pathlib import Path

import pytest

from mgroupoid import fixtures
from mgroupoid.cli import main
from mgroupoid.funkit import is_positive_definite
from mgroupoid.convolution import ArrowFunction
from mgroupoid.io import ParseError, dump_gspec, load_function, load_gspec, load_treeing, parse_gspec

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- file formats ------------------------------------------------------------

def test_gspec_round_trip(G):
    again = parse_gspec(json.loads(json.dumps(dump_gspec(G))))
    assert again == G


@pytest.mark.parametrize("name", sorted(fixtures.FIXTURES))
def test_shipped_gspec_files_match_fixtures(name):
    assert load_gspec(FIX / f"{name.lower()}.gspec") == fixtures.get(name)


def test_generator_forms():
    assert load_gspec(FIX / "equivalence_r2.gspec") == fixtures.r2()
    group = {"group": {"elements": ["e", "g"], "table": [["e", "g"], ["g", "e"]], "identity": "e"}}
    assert parse_gspec(group) == fixtures.z2()
    action = {"name": "Z2swap", "action": {
        "group": group["group"], "units": ["a", "b"],
        "action": [["a", "e", "a"], ["b", "e", "b"], ["a", "g", "b"], ["b", "g", "a"]],
        "mu": {"a": "1/2", "b": "1/2"}}}
    assert parse_gspec(action) == fixtures.z2_swap()


@pytest.mark.parametrize("payload", [[], {"units": []}, {"equivalence": {"blocks": [["a"]]}}])
def test_parse_errors(payload):
    with pytest.raises(ParseError):
        parse_gspec(payload)


def test_function_and_treeing_files(tmp_path):
    G = fixtures.r2()
    F = load_function(G, FIX / "f_exp.json")
    assert is_positive_definite(F)[0]
    assert load_treeing(G, FIX / "q.json") == ["ab", "ba"]
    bad = tmp_path / "bad.json"
    bad.write_text('{"re": {"zz": 1}}')
    with pytest.raises(ParseError, match="unknown arrows"):
        load_function(G, bad)
    bad.write_text('{"ab": 1')
    with pytest.raises(ParseError, match="invalid JSON"):
        load_treeing(G, bad)


# -- commands ----------------------------------------------------------------

def test_validate(capsys):
    code, out, _ = run(capsys, "validate", FIX / "r2.gspec")
    assert code == 0 and "PASS" in out
    code, out, _ = run(capsys, "validate", FIX / "broken_associativity.gspec")
    assert code == 1 and "associativity fails for (g, g, g2)" in out
    code, out, _ = run(capsys, "validate", FIX / "zero_mass.gspec", "--format", "json")
    report = json.loads(out)
    assert code == 1 and report["status"] == "fail"
    assert "full support required" in report["checks"][0]["witness"][0]


def test_usage_errors(capsys):
    assert run(capsys, "validate", FIX / "missing.gspec")[0] == 2
    assert run(capsys, "check", "bogus", FIX / "r2.gspec")[0] == 2
    assert run(capsys, "check", "pd", FIX / "r2.gspec")[0] == 2
    assert run(capsys, "witness", "treeing", FIX / "r2.gspec", FIX / "q.json", "x")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_check_pd(capsys):
    code, out, _ = run(capsys, "check", "pd", FIX / "r2.gspec", FIX / "f_exp.json", "--format", "json")
    report = json.loads(out)
    assert code == 0
    fib = {c["id"]: c["witness"] for c in report["checks"] if c["id"].startswith("pd.fibre")}
    assert set(fib) == {"pd.fibre[a]", "pd.fibre[b]"}
    assert all(abs(w["min_eig"] - (1 - 0.36787944117144233)) < 1e-12 for w in fib.values())
    assert run(capsys, "check", "pd", FIX / "r2.gspec", FIX / "f_not_pd.json")[0] == 1


def test_check_cnd(capsys):
    assert run(capsys, "check", "cnd", FIX / "r2.gspec", FIX / "psi_r2.json")[0] == 0


def test_check_treeing(capsys):
    code, out, _ = run(capsys, "check", "treeing", FIX / "r3.gspec", FIX / "q_cycle.json",
                       "--format", "json")
    report = json.loads(out)
    assert code == 1
    cycles = report["checks"][0]["witness"]["cycles"]
    assert all(len(c) == 4 and c[0] == c[-1] for c in cycles.values())
    assert run(capsys, "check", "treeing", FIX / "r3.gspec", FIX / "r3_treeing.json")[0] == 0


@pytest.mark.parametrize("suite", ["vn", "amen"])
def test_check_suites_pass(capsys, suite):
    code, out, _ = run(capsys, "check", suite, FIX / "r2.gspec", "--samples", "20")
    assert code == 0, out


def test_check_haagerup(capsys):
    code, out, _ = run(capsys, "check", "haagerup", "fixture:R3", FIX / "r3_treeing.json",
                       "--stages", "5")
    assert code == 0 and "stage[5]" in out


def test_witness_treeing(capsys, tmp_path):
    code, out, _ = run(capsys, "witness", "treeing", FIX / "r2.gspec", FIX / "q.json", 3,
                       "--out", tmp_path)
    assert code == 0
    data = json.loads((tmp_path / "treeing_witness.json").read_text())
    assert [s["k"] for s in data] == [1, 2, 3]
    G = fixtures.r2()
    for s in data:
        F = ArrowFunction.from_json(G, s["F"])
        assert is_positive_definite(F)[0] and s["deviation"] <= 1 / s["k"]


def test_witness_treeing_on_non_treeing(capsys):
    code, out, _ = run(capsys, "witness", "treeing", FIX / "r3.gspec", FIX / "q_cycle.json", 2)
    assert code == 1 and "cycles" in out


def test_witness_amen(capsys, tmp_path):
    code, out, _ = run(capsys, "witness", "amen", FIX / "r2.gspec", 2, "--out", tmp_path,
                       "--format", "json")
    assert code == 0
    fields = json.loads((tmp_path / "amen_witness.json").read_text())
    assert len(fields) == 2
    devs = [c["residual"] for c in json.loads(out)["checks"] if c["id"].endswith(".deviation")]
    assert devs[0] > devs[1] and devs[1] < 1e-12


def test_reports_are_deterministic(capsys):
    args = ("check", "vn", "fixture:R2w", "--samples", "15", "--seed", "3", "--format", "json")
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second
