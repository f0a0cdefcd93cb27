import json

import pytest

from surfdyn.cli import main


def lines(capsys):
    return [json.loads(l) for l in capsys.readouterr().out.splitlines() if l.startswith("{")]


def test_lattice_verify_exit_codes(capsys):
    assert main(["lattice-verify", "--gram", "[[7,0],[0,-14]]", "--check", "appendix"]) == 0
    out = lines(capsys)
    even = [r for r in out if r.get("check") == "even"]
    assert even and even[0]["ok"] is False
    assert main(["lattice-verify", "--gram", "[[7,0],[0,-14]]", "--check", "even"]) == 1
    assert main(["lattice-verify", "--gram", "[[14,0],[0,-28]]", "--check", "even"]) == 0
    assert main(["lattice-verify", "--gram", "[[1,2],[3,4]]"]) == 2
    assert main(["lattice-verify", "--gram", "not json"]) == 2


def test_lyapunov(capsys):
    assert main(["lyapunov", "--seeds", "0", "--n", "2000"]) == 0
    rec = lines(capsys)[0]
    assert abs(rec["exponents"][0] - 0.9624236501192069) < 1e-3


def test_flow_check_and_jets(capsys):
    assert main(["flow-check", "--pairs", "50"]) == 0
    assert lines(capsys)[-1]["ok"]
    assert main(["jets-test"]) == 0


def test_cohomology_classify(capsys):
    assert main(["cohomology", "classify", "--words", "s1s2s3"]) == 0
    out = lines(capsys)
    assert any(r.get("kind") == "loxodromic" for r in out)


def test_measure_hist_csv(tmp_path, capsys):
    csv = tmp_path / "h.csv"
    assert main(["measure-hist", "--config", "torus_pair", "--samples", "5000", "--csv", str(csv)]) == 0
    assert csv.read_text().splitlines()[0].startswith("pair")


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("model: {type: torus}\nmeasure: {atoms: [A]}\nbogus: 1\n")
    assert main(["report", "--config", str(bad), "--out-dir", str(tmp_path / "r")]) == 2
    assert main(["lyapunov", "--config", str(tmp_path / "nope.yaml")]) == 2


def test_report_failure_exit_code(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("model: {type: torus, generators: {A: [[2,1],[1,1]]}}\n"
                   "measure: {atoms: [A]}\nn_steps: 1000\nburn_in: 10\nstages: [exponents]\n"
                   "exponents: {expect_lambda_plus: 2.0}\n")
    assert main(["report", "--config", str(cfg), "--out-dir", str(tmp_path / "r")]) == 1
    assert (tmp_path / "r" / "manifest.json").exists()


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
