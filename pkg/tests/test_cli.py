import json

import pytest

from cocycle_forge.cli import main
from cocycle_forge.entropy import FiniteSpace


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    return {
        "line": write(tmp_path / "line.json", {"dim": 1, "generators": [["1"]], "cap": ["1"]}),
        "simplex2": write(tmp_path / "s2.json",
                          {"dim": 2, "generators": [["1", "0"], ["0", "1"]], "cap": ["1", "1"]}),
        "product": write(tmp_path / "prod.json", {"family": "bilinear", "matrices": [[["1"]]]}),
        "asym": write(tmp_path / "asym.json",
                      {"family": "bilinear", "matrices": [[["0", "1"], ["2", "0"]]]}),
        "bad_q": write(tmp_path / "badq.json", {"family": "bilinear", "matrices": [[["1/0"]]]}),
        "potential2": write(tmp_path / "pot.json", {"family": "potential", "dim": 2, "components": [
            [{"coef": "1", "exp": [1, 1]}, {"coef": "-2/3", "exp": [3, 0]}]]}),
        "halves": write(tmp_path / "halves.json", {"probs": ["1/2", "1/2"]}),
        "m13": write(tmp_path / "m13.json", {"out_dim": 1, "atoms": [["1"], ["3"]]}),
        "singletons": write(tmp_path / "single.json", [[0], [1]]),
        "four": write(tmp_path / "four.json", {"probs": ["1/4"] * 4}),
        "m4": write(tmp_path / "m4.json", {"out_dim": 1, "atoms": [["1", "0"], ["1", "2"], ["1", "0"], ["2", "1"]]}),
        "a4": write(tmp_path / "a4.json", [[0, 1], [2, 3]]),
        "b4": write(tmp_path / "b4.json", [[0, 2], [1, 3]]),
        "null_space": write(tmp_path / "null.json", {"probs": ["1/2", "1/2", "0"]}),
        "m_null": write(tmp_path / "mnull.json", {"out_dim": 1, "atoms": [["1"], ["1"], ["4"]]}),
        "zero_delta": write(tmp_path / "dz.json",
                            {"ground_truth_m": {"out_dim": 1, "atoms": [["0"]] * 4}}),
    }


def test_validate_pass(capsys, files):
    code, out, _ = run(capsys, "validate-cocycle", files["line"], files["product"], "--samples", 200)
    assert code == 0 and out.startswith("PASS")


def test_validate_asymmetric_fails(capsys, files):
    code, out, _ = run(capsys, "validate-cocycle", files["simplex2"], files["asym"], "--format", "json")
    assert code == 1
    report = json.loads(out)["report"]
    assert not report["passed"] and report["counterexample"]["law"] == "symmetry"


def test_malformed_rational_exit_2(capsys, files):
    code, _, err = run(capsys, "validate-cocycle", files["line"], files["bad_q"])
    assert code == 2 and "zero denominator" in err


def test_missing_file_exit_2(capsys, files, tmp_path):
    code, _, _ = run(capsys, "solve", files["line"], tmp_path / "nope.json")
    assert code == 2


def test_bad_flag_exit_2(capsys):
    assert main(["solve", "--samples", "0", "a", "b"]) == 2


def test_solve_writes_tower(capsys, files, tmp_path):
    out_path = tmp_path / "tower.json"
    code, out, _ = run(capsys, "solve", files["line"], files["product"], "--out", out_path,
                       "--samples", 200)
    assert code == 0
    tower = json.loads(out_path.read_text())
    assert [s["case"] for s in tower["steps"]] == ["A"]
    code, _, _ = run(capsys, "solve", files["simplex2"], files["potential2"], "--out", out_path,
                     "--samples", 100)
    assert code == 0
    assert [s["case"] for s in json.loads(out_path.read_text())["steps"]] == ["A", "A"]


def test_solve_broken_cocycle_exit_1(capsys, files):
    code, out, _ = run(capsys, "solve", files["simplex2"], files["asym"], "--format", "json")
    assert code == 1
    assert json.loads(out)["report"]["counterexample"]


def test_oracle_compare(capsys, files, tmp_path):
    code, _, _ = run(capsys, "oracle-compare", files["line"], files["product"], "--q", 6, "--samples", 100)
    assert code == 0
    code, _, _ = run(capsys, "oracle-compare", files["simplex2"], files["potential2"], "--q", 4,
                     "--samples", 100)
    assert code == 0


def test_oracle_compare_corrupted_tower(capsys, files, tmp_path):
    dom = write(tmp_path / "plane.json", {"dim": 2, "cap": ["1", "1"], "generators": [
        ["1", "0"], ["1", "1"], ["0", "1"], ["-1", "2"]]})
    cocycle = write(tmp_path / "bil.json", {"family": "bilinear", "matrices": [[["1", "1/2"], ["1/2", "-1"]]]})
    tower_path = tmp_path / "t.json"
    assert run(capsys, "solve", dom, cocycle, "--out", tower_path, "--samples", 100)[0] == 0
    assert run(capsys, "oracle-compare", dom, cocycle, "--q", 4, "--tower", tower_path)[0] == 0
    data = json.loads(tower_path.read_text())
    step = next(s for s in data["steps"] if s["case"] == "B")
    step["anchor_value"] = ["12345"]
    tower_path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "oracle-compare", dom, cocycle, "--q", 4, "--tower", tower_path)
    assert code == 1 and out.startswith("FAIL")


def test_entropy_eval(capsys, files):
    code, out, _ = run(capsys, "entropy", "eval", files["halves"], files["m13"], files["singletons"],
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["L_m"] == ["4"]


def test_entropy_additivity(capsys, files):
    code, _, _ = run(capsys, "entropy", "additivity", files["four"], files["m4"], files["a4"], files["b4"])
    assert code == 0
    code, _, _ = run(capsys, "entropy", "additivity", files["four"], files["m4"], files["a4"], files["a4"])
    assert code == 2


def test_entropy_null_atom_exit_2(capsys, files):
    code, _, err = run(capsys, "entropy", "eval", files["null_space"], files["m_null"], files["singletons"])
    assert code == 2 and "probability 0" in err


def test_entropy_recover_zero_delta(capsys, files, tmp_path):
    out_path = tmp_path / "m.json"
    code, _, _ = run(capsys, "entropy", "recover-m", files["four"], files["zero_delta"], "--out", out_path)
    assert code == 0
    atoms = json.loads(out_path.read_text())["atoms"]
    assert len({tuple(a) for a in atoms}) == 1


def test_entropy_measure_dependence(capsys, files):
    code, out, _ = run(capsys, "entropy", "remark2", files["four"], files["m4"], "--format", "json")
    payload = json.loads(out)
    assert code == 0 and payload["measure_multiple"] is False
    w = payload["witness"]
    assert w["L_m(A)"] != w["L_m(A')"]


def test_gen_is_deterministic(capsys, tmp_path):
    for kind, extra in [("domain", ["--dims", 3, "--generators", 4]),
                        ("cocycle", ["--family", "sum", "--dims", 2]),
                        ("space", ["--atoms", 6, "--denom", 12])]:
        a, b = tmp_path / f"{kind}1.json", tmp_path / f"{kind}2.json"
        assert run(capsys, "gen", kind, "--seed", 7, "--out", a, *extra)[0] == 0
        assert run(capsys, "gen", kind, "--seed", 7, "--out", b, *extra)[0] == 0
        assert a.read_bytes() == b.read_bytes()
    space = FiniteSpace.from_json(json.loads((tmp_path / "space1.json").read_text()))
    assert sum(space.probs) == 1 and space.n_atoms == 6


def test_generated_instances_pass(capsys, tmp_path):
    dom, coc = tmp_path / "d.json", tmp_path / "c.json"
    run(capsys, "gen", "domain", "--dims", 3, "--generators", 5, "--seed", 2, "--out", dom)
    run(capsys, "gen", "cocycle", "--dims", 3, "--family", "shift", "--out-dim", 2, "--seed", 2, "--out", coc)
    assert run(capsys, "solve", dom, coc, "--samples", 150)[0] == 0
    space, delta = tmp_path / "s.json", tmp_path / "delta.json"
    run(capsys, "gen", "space", "--atoms", 5, "--denom", 10, "--seed", 1, "--out", space)
    run(capsys, "gen", "delta-fixture", "--space", space, "--out-dim", 2, "--seed", 1, "--out", delta)
    assert run(capsys, "entropy", "recover-m", space, delta)[0] == 0


def test_json_report_is_reproducible(capsys, files):
    argv = ["solve", files["simplex2"], files["potential2"], "--samples", 80, "--format", "json"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    assert "seconds" not in json.loads(first)


def test_thread_env_validated(capsys, files, monkeypatch):
    monkeypatch.setenv("COCYCLE_FORGE_THREADS", "zero")
    assert run(capsys, "validate-cocycle", files["line"], files["product"])[0] == 2
