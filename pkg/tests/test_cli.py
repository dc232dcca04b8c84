import json
import math

import numpy as np
import pytest

from retrodictor.cli import main
from retrodictor.formats import ensemble_to_payload, povm_to_payload, write_json
from retrodictor.ud import UdInstance, optimal_predictive_povm, ud_ensemble, ud_states


@pytest.fixture
def ud_files(tmp_path):
    inst = UdInstance.from_overlap(0.5, (0.5, 0.5))
    ens_path = tmp_path / "ensemble.json"
    povm_path = tmp_path / "povm.json"
    write_json(ensemble_to_payload(ud_ensemble(inst), pure_states=list(ud_states(inst))), str(ens_path))
    write_json(povm_to_payload(optimal_predictive_povm(inst).povm), str(povm_path))
    return str(ens_path), str(povm_path)


def test_transform_ud_files_pass(ud_files, tmp_path):
    ens_path, povm_path = ud_files
    out = tmp_path / "report.json"
    code = main(["transform", ens_path, povm_path, "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] is True
    assert doc["derived"]["unbiased"] is False
    assert np.allclose(doc["derived"]["mu"], [0.25, 0.25, 0.5], atol=1e-12)
    # retro POVM elements are rank-1 projectors onto the retro basis
    for rows in doc["derived"]["retro_povm"][:2]:
        m = np.array([[complex(*z) for z in row] for row in rows])
        eig = np.linalg.eigvalsh(m)
        assert abs(eig[-1] - 1.0) < 1e-10
        assert abs(eig[0]) < 1e-10
    names = [c["name"] for c in doc["checks"]]
    assert "retro-povm-completeness" in names
    assert all(set(c) >= {"name", "value", "tolerance", "passed"} for c in doc["checks"])


def test_transform_unnormalized_priors_exit_1(ud_files, tmp_path, capsys):
    _, povm_path = ud_files
    bad = tmp_path / "bad.json"
    doc = json.loads(open(ud_files[0]).read())
    doc["priors"] = [0.5, 0.4]
    bad.write_text(json.dumps(doc))
    code = main(["transform", str(bad), povm_path])
    assert code == 1
    err = capsys.readouterr().err
    assert "priors_sum" in err
    assert "1.000e-01" in err


def test_transform_unbiased_reduction_reported(tmp_path):
    ens = tmp_path / "ens.json"
    povm = tmp_path / "povm.json"
    eye = lambda k: [[[1.0 if i == j == k else 0.0, 0.0] for j in range(2)] for i in range(2)]
    ens.write_text(json.dumps({
        "dim": 2,
        "states": [eye(0), eye(1)],
        "priors": [0.5, 0.5],
    }))
    povm.write_text(json.dumps({"dim": 2, "elements": [eye(0), eye(1)]}))
    out = tmp_path / "rep.json"
    code = main(["transform", str(ens), str(povm), "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["derived"]["unbiased"] is True
    # unbiased reduction: retro POVM = D eta_i rho_i = the projectors themselves
    got = np.array([[complex(*z) for z in row] for row in doc["derived"]["retro_povm"][0]])
    assert np.allclose(got, np.diag([1.0, 0.0]), atol=1e-12)


def test_ud_command_spot_values(tmp_path):
    out = tmp_path / "ud.json"
    code = main(["ud", "--eta1", "0.5", "--overlap", "0.5", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["derived"]["p_success"] - 0.5) < 1e-12
    assert doc["derived"]["regime"] == "interior"

    code = main(["ud", "--eta1", "0.9", "--overlap", "0.7071067811865476", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["derived"]["p_success"] - 0.45) < 1e-12
    assert doc["derived"]["regime"] == "clamped"


def test_ud_command_grid_check(tmp_path):
    out = tmp_path / "ud.json"
    code = main(["ud", "--eta1", "0.7", "--overlap", "0.4", "--grid-check", "1e-4", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    check = [c for c in doc["checks"] if c["name"] == "grid-oracle-deviation"][0]
    assert check["value"] <= 2e-4
    assert check["passed"] is True


def test_ud_command_alpha_and_overlap_exclusive(capsys):
    code = main(["ud", "--eta1", "0.5", "--alpha", "0.3", "--overlap", "0.5"])
    assert code == 1


def test_ud_command_bad_overlap_exit_1():
    assert main(["ud", "--eta1", "0.5", "--overlap", "1.0"]) == 1
    assert main(["ud", "--eta1", "0.5", "--overlap", "-0.1"]) == 1
    assert main(["ud", "--eta1", "1.0", "--overlap", "0.5"]) == 1


def test_ud_command_singular_exit_2():
    assert main(["ud", "--eta1", "0.5", "--alpha", "1e-9"]) == 2


def test_channel_command(tmp_path):
    out = tmp_path / "ch.json"
    code = main(["channel", "--eta1", "0.5", "--alpha", str(math.pi / 8), "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    swap = [c for c in doc["checks"] if c["name"] == "swap-residual"][0]
    assert swap["value"] < 1e-10


def test_simulate_reports_are_byte_identical(ud_files, tmp_path):
    ens_path, povm_path = ud_files
    out1 = tmp_path / "s1.json"
    out2 = tmp_path / "s2.json"
    assert main(["simulate", ens_path, povm_path, "--n", "200000", "--seed", "42",
                 "--out", str(out1)]) == 0
    assert main(["simulate", ens_path, povm_path, "--n", "200000", "--seed", "42",
                 "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    doc = json.loads(out1.read_text())
    assert doc["inputs"]["rng_algorithm"] == "philox4x64"
    assert doc["derived"]["counts"][0][1] == 0
    assert doc["derived"]["counts"][1][0] == 0


def test_simulate_seed_env_default(ud_files, tmp_path, monkeypatch):
    ens_path, povm_path = ud_files
    out1 = tmp_path / "e1.json"
    out2 = tmp_path / "e2.json"
    monkeypatch.setenv("RETRODICTOR_SEED", "777")
    assert main(["simulate", ens_path, povm_path, "--n", "10000", "--out", str(out1)]) == 0
    monkeypatch.delenv("RETRODICTOR_SEED")
    assert main(["simulate", ens_path, povm_path, "--n", "10000", "--seed", "777",
                 "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert json.loads(out1.read_text())["inputs"]["seed"] == 777


def test_verify_failure_modes_suite(capsys):
    assert main(["verify", "--suite", "failure-modes"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out
    assert "verify: PASS" in out


def test_verify_unknown_suite_exit_1():
    assert main(["verify", "--suite", "nonsense"]) == 1


def test_json_report_to_stdout(ud_files, capsys):
    ens_path, povm_path = ud_files
    assert main(["transform", ens_path, povm_path]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["command"] == "transform"
    assert doc["passed"] is True


def test_missing_file_exit_1(capsys):
    assert main(["transform", "/does/not/exist.json", "/nor/this.json"]) == 1
