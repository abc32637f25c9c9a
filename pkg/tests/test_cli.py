import csv
import json
from pathlib import Path

import pytest

from sobmuck.cli import EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, main

SPECS = Path(__file__).resolve().parents[1] / "scripts" / "specs"


def spec(name):
    return str(SPECS / f"{name}.json")


# small but complete invocation for every command
COMMANDS = {
    "lambda": ["--nu1", spec("lebesgue01"), "--nu2", spec("lebesgue01"), "--grid", "256"],
    "classify": ["--mu1", spec("singular_product_mu1")],
    "decide": ["--mu0", spec("atom_origin_mu0"), "--mu1", spec("atom_origin_mu1")],
    "sop": ["--mu0", spec("lebesgue_m11"), "--mu1", spec("zero_m11"), "--degree", "4", "--nmax", "6"],
    "mnorm": ["--mu0", spec("lebesgue_m11"), "--mu1", spec("zero_m11"), "--nmax", "6"],
    "verify": ["--nu1", spec("niff_nu1"), "--nu2", spec("lebesgue01"), "--nu3", spec("lebesgue01"),
               "--degree", "3", "--trials", "3"],
    "counterexample": ["--nu1", spec("niff_nu1"), "--nu2", spec("lebesgue01"), "--nu3", spec("niff_nu3"),
                       "--nmax", "64"],
}


def run(tmp_path, command, *extra, sub="out"):
    out = tmp_path / sub
    code = main([command, *COMMANDS[command], *extra, "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "value"]
    return [(int(n), float(v)) for n, v in rows[1:]]


def test_lambda_contains_quarter(tmp_path):
    code, out = run(tmp_path, "lambda", "--grid", "4096")
    assert code == EXIT_OK
    d = json.loads((out / "lambda.json").read_text())
    enc = d["enclosure"]
    assert enc["lo"] <= 0.25 <= enc["hi"] and enc["hi"] - enc["lo"] <= 1e-4


def test_lambda_zero_reciprocal_is_finite_no(tmp_path):
    out = tmp_path / "o"
    code = main(["lambda", "--nu1", spec("lebesgue01"), "--nu2", spec("zero01"), "--out", str(out)])
    assert code == EXIT_OK
    assert json.loads((out / "lambda.json").read_text())["finite"] == "No"


def test_malformed_spec_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["lambda", "--nu1", str(bad), "--nu2", spec("lebesgue01"), "--out", str(tmp_path)]) == EXIT_PARSE
    assert main(["lambda", "--nu1", str(tmp_path / "missing.json"), "--nu2", spec("lebesgue01")]) == EXIT_PARSE
    assert main(["nonsense"]) == EXIT_PARSE
    assert main(["lambda", "--nu1", spec("lebesgue01"), "--nu2", spec("lebesgue01"), "--grid", "100"]) == EXIT_PARSE


def test_precondition_exit_3(tmp_path):
    code, _ = run(tmp_path, "lambda", "--p", "1.0")
    assert code == EXIT_PRECONDITION
    code, _ = run(tmp_path, "sop", "--p", "3")
    assert code == EXIT_PRECONDITION


def test_threads_env_validated(tmp_path, monkeypatch):
    monkeypatch.setenv("SOBMUCK_THREADS", "many")
    assert run(tmp_path, "decide")[0] == EXIT_PARSE
    monkeypatch.setenv("SOBMUCK_THREADS", "4")
    assert run(tmp_path, "decide")[0] == EXIT_OK


def test_decide_atom_origin_bounded(tmp_path):
    code, out = run(tmp_path, "decide")
    assert code == EXIT_OK
    assert json.loads((out / "verdict.json").read_text())["outcome"] == "Bounded"


def test_classify_singular_product(tmp_path):
    code, out = run(tmp_path, "classify")
    assert code == EXIT_OK
    d = json.loads((out / "classify.json").read_text())
    assert d["monotone"]["status"] == "Yes"
    assert d["piecewise"]["strongly"] is True


def test_counterexample_growth(tmp_path):
    code, out = run(tmp_path, "counterexample")
    assert code == EXIT_OK
    rows = dict(read_csv(out / "counterexample.csv"))
    vals = [rows[n] for n in sorted(rows)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert rows[64] / rows[8] > 2


def test_sop_and_mnorm_outputs(tmp_path):
    code, out = run(tmp_path, "sop")
    assert code == EXIT_OK
    coef = read_csv(out / "sop_coefficients.csv")
    # monic Legendre of degree 4: x^4 - 6/7 x^2 + 3/35
    assert [k for k, _ in coef] == [0, 1, 2, 3, 4]
    assert coef[0][1] == pytest.approx(3 / 35, abs=1e-10) and coef[2][1] == pytest.approx(-6 / 7, abs=1e-10)
    assert coef[4][1] == 1.0
    code, out = run(tmp_path, "mnorm", sub="m")
    vals = [v for _, v in read_csv(out / "mnorm.csv")]
    assert code == EXIT_OK and len(vals) == 7
    assert all(b >= a * (1 - 1e-12) for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_byte_identical_runs(tmp_path, command):
    c1, o1 = run(tmp_path, command, sub="a")
    c2, o2 = run(tmp_path, command, sub="b")
    assert c1 == c2 == EXIT_OK
    names = sorted(p.name for p in o1.iterdir())
    assert names == sorted(p.name for p in o2.iterdir())
    for name in names:
        if name != "manifest.json":
            assert (o1 / name).read_bytes() == (o2 / name).read_bytes()
    m1, m2 = (json.loads((o / "manifest.json").read_text()) for o in (o1, o2))
    assert m1["config_hash"] == m2["config_hash"] and m1["artifacts"] == m2["artifacts"]


@pytest.mark.parametrize("command", ["decide", "counterexample", "verify"])
def test_manifest_replay(tmp_path, command):
    code, out = run(tmp_path, command)
    assert code == EXIT_OK
    replay = tmp_path / "replay"
    assert main(["--manifest", str(out / "manifest.json"), "--out", str(replay)]) == EXIT_OK
    for p in out.iterdir():
        if p.name != "manifest.json":
            assert (replay / p.name).read_bytes() == p.read_bytes()
    m1, m2 = (json.loads((o / "manifest.json").read_text()) for o in (out, replay))
    assert m1["artifacts"] == m2["artifacts"]
