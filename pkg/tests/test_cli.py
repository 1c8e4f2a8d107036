import json
from pathlib import Path

import pytest

from weilalg.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *args):
    code = main([a if not a.endswith(".json") or "/" in a else str(DATA / a) for a in args])
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.parametrize("args, code", [
    (("check", "so3.json"), 0),
    (("check", "heis3.json"), 0),
    (("check", "tangent1.json"), 0),
    (("check", "pair-groupoid.json"), 0),
    (("check", "pair-groupoid-R2.json"), 0),
    (("check", "action-groupoid.json"), 0),
    (("check", "heisenberg-group.json"), 0),
    (("check", "so3-broken.json"), 1),
    (("imcheck", "poisson-x.json"), 0),
    (("imcheck", "volume-counterexample.json"), 1),
    (("transgression", "transgression-trivial.json"), 0),
    (("transgression", "transgression-exact.json"), 0),
    (("transgression", "transgression-perturbed.json"), 1),
    (("vanest", "pair-groupoid.json", "form-pair-x1-x0.json"), 0),
    (("vanest", "pair-groupoid-R2.json", "form-pair-G2.json"), 0),
    (("vanest", "pair-groupoid.json", "form-constant.json"), 1),
])
def test_exit_codes(capsys, args, code):
    got, rep = run(capsys, *args)
    assert got == code and rep["ok"] == (code == 0)
    assert rep["command"] == args[0] and rep["seed"] == 0


def test_broken_so3_reports_jacobi(capsys):
    _, rep = run(capsys, "check", "so3-broken.json")
    failed = {f["identity"] for fd in rep["findings"] for f in fd["failures"]}
    assert "jacobi" in failed and "dh.dh" in failed
    assert any(not fd["ok"] and fd["name"].startswith("d2") for fd in rep["findings"])


def test_groupoid_check_reports_lie_algebroid(capsys):
    _, rep = run(capsys, "check", "pair-groupoid.json")
    assert rep["lie_algebroid"]["anchor"] == [["1"]]


@pytest.mark.parametrize("args, betti", [
    (("--mode", "total", "--max-p", "4"), [1, 0, 0, 0, 0]),
    (("--mode", "row", "--q", "0"), [1, 0, 0, 1]),
])
def test_cohomology_so3(capsys, args, betti):
    code, rep = run(capsys, "cohomology", "so3.json", *args)
    assert code == 0 and rep["findings"][0]["betti"] == betti


def test_cohomology_tangent_matches_pair_groupoid(capsys):
    opts = ("--mode", "row", "--q", "1", "--poly-degree", "2", "--max-p", "2")
    _, w = run(capsys, "cohomology", "tangent1.json", *opts, "--truncation", "weight")
    _, g = run(capsys, "cohomology", "pair-groupoid.json", *opts)
    assert w["findings"][0]["betti"] == g["findings"][0]["betti"] == [0, 0, 0]


def test_vanest_element(capsys):
    _, rep = run(capsys, "vanest", "pair-groupoid.json", "form-pair-x1-x0.json")
    assert rep["element"] == "th1"
    _, rep = run(capsys, "vanest", "pair-groupoid.json", "form-constant.json")
    assert rep["findings"][0]["name"] == "normalized"


def test_volume_reports_mk2(capsys):
    _, rep = run(capsys, "imcheck", "volume-counterexample.json")
    failed = {f["identity"] for fd in rep["findings"] for f in fd["failures"]}
    assert "mk-2" in failed


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return str(p)


def test_malformed_json_reports_position(tmp_path, capsys):
    code, rep = run(capsys, "check", write(tmp_path, "bad.json", '{"kind": "algebroid",\n'))
    assert code == 2 and "line 2" in rep["error"]["where"]


def test_bad_polynomial_reports_position(tmp_path, capsys):
    d = json.loads((DATA / "so3.json").read_text())
    d["structure"]["1,2"] = ["0", "0", "1 + *x"]
    code, rep = run(capsys, "check", write(tmp_path, "p.json", d))
    assert code == 2 and "position" in rep["error"]["where"] + rep["error"]["message"]


def test_unknown_key_rejected(tmp_path, capsys):
    d = json.loads((DATA / "so3.json").read_text())
    d["colour"] = "red"
    code, rep = run(capsys, "check", write(tmp_path, "k.json", d))
    assert code == 2 and "colour" in rep["error"]["message"]


def test_phi_not_closed_is_input_error(tmp_path, capsys):
    d = json.loads((DATA / "volume-counterexample.json").read_text())
    d.update(k=1, tau=["0", "0", "0"], phi="x dy^dz")
    code, rep = run(capsys, "imcheck", write(tmp_path, "phi.json", d))
    assert code == 2 and "closed" in rep["error"]["message"]


def test_missing_file_and_usage(capsys, tmp_path):
    code, _ = run(capsys, "check", str(tmp_path / "nope.json"))
    assert code == 2
    assert main(["frobnicate"]) == 2


def test_seed_is_recorded(capsys):
    _, rep = run(capsys, "check", "so3.json", "--seed", "5")
    assert rep["seed"] == 5


@pytest.mark.parametrize("args", [
    ("check", "heisenberg-group.json"),
    ("cohomology", "heis3.json", "--mode", "total"),
    ("vanest", "pair-groupoid-R2.json", "form-pair-G2.json"),
    ("transgression", "transgression-perturbed.json"),
])
def test_reports_are_deterministic(capsys, args):
    argv = [str(DATA / a) if a.endswith(".json") else a for a in args]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
