from __future__ import annotations

import json
import math
from typing import Any

import numpy as np
import pytest
from typer.testing import CliRunner

import hermap.cli
from hermap import app, main
from hermap.documents import load_examples, serialize_matrix

runner = CliRunner()

TRANSPOSE = {"m": 2, "n": 2, "builtin": {"name": "transpose"}}
HERMITIZE = {"m": 2, "n": 2, "builtin": {"name": "hermitize"}}
BLOCKS = {"m": 4, "n": 4, "builtin": {"name": "block_example"}}


def report(result) -> dict[str, Any]:
    """The JSON object a command prints last on stdout."""
    return json.loads(result.stdout.strip().splitlines()[-1])


def invoke(write_document, document: dict[str, Any], *args: str):
    return runner.invoke(app, ["--input", str(write_document(document)), *args])


def test_analyze_reads_standard_input():
    result = runner.invoke(app, ["analyze"], input=json.dumps(TRANSPOSE))
    assert result.exit_code == 0, result.output
    data = report(result)
    assert data["dcp"] == pytest.approx(1.0)
    assert data["multiplicity_k"] == 1
    assert data["bound"] == pytest.approx(1.0)
    assert data["is_cp"] is False
    assert data["rank"] == 4


def test_choi_command(write_document):
    result = invoke(write_document, TRANSPOSE, "choi")
    assert result.exit_code == 0, result.output
    data = report(result)
    assert data["choi"]["re"] == [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
    assert data["is_hermitian"] is True


def test_jordan_and_approx_commands(write_document):
    jordan = report(invoke(write_document, TRANSPOSE, "jordan"))
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(jordan["c_minus"]["re"], (np.eye(4) - swap) / 2)
    assert jordan["negative_energy"] == pytest.approx(1.0)
    approx = report(invoke(write_document, TRANSPOSE, "approx"))
    assert approx["distance"] == pytest.approx(1.0)
    assert approx["approximation"]["m"] == 2


def test_kraus_command(write_document):
    data = report(invoke(write_document, HERMITIZE, "kraus"))
    assert data["rank"] == 4
    assert [round(t["weight"], 9) for t in data["terms"]] == [3.0, 1.0, 1.0, -1.0]


def test_extend_hermitize(write_document):
    result = invoke(write_document, HERMITIZE, "extend", "--check-psi")
    assert result.exit_code == 0, result.output
    data = report(result)
    assert data["k"] == 4
    assert data["q_diag"] == [1, 1, 1, -1]
    assert data["psi_is_cp"] is True


def test_reduce_detects_blocks(write_document):
    result = invoke(write_document, BLOCKS, "--verbose", "reduce")
    assert result.exit_code == 0, result.output
    data = report(result)
    assert data["partition"] == "2,2/2,2"
    assert data["detected"] is True
    assert data["k"] == 4
    assert data["claimed_k"] == 4
    assert data["block_ranks"] == [4, 2]
    assert data["max_error"] <= 1e-9
    assert data["summed_q_diag"] == [2, 0, 1, -1]
    assert data["summed_max_error"] >= 1 - 1e-9


def test_audit_sources(write_document):
    jordan = report(invoke(write_document, TRANSPOSE, "audit"))
    assert jordan["source"] == "jordan"
    assert jordan["valid"] and jordan["satisfied"]
    assert jordan["gap"] == pytest.approx(0.0, abs=1e-9)

    shifted = report(invoke(write_document, TRANSPOSE, "audit", "--trace-shift", "1"))
    assert shifted["source"] == "trace-shift"
    assert shifted["hs_c2"] == pytest.approx(2.0)

    eye = serialize_matrix(np.eye(4))
    wrong = {**TRANSPOSE, "decomposition": {"c1": eye, "c2": eye}}
    document = report(invoke(write_document, wrong, "audit"))
    assert document["source"] == "document"
    assert document["valid"] is False


def test_verify_cp_builtin(write_document):
    result = invoke(write_document, {"m": 2, "n": 2, "builtin": {"name": "trace"}}, "verify", "--samples", "20")
    assert result.exit_code == 0, result.output
    data = report(result)
    assert data["passed"] is True
    assert data["samples"] == 20
    assert data["seed"] == 0
    assert data["max_error"] <= 1e-9
    assert data["psi_is_cp"] is True


def test_verify_reduced_extension(write_document):
    result = invoke(write_document, BLOCKS, "verify", "--partition", "2,2/2,2", "--samples", "10")
    assert result.exit_code == 0, result.output
    assert report(result)["k"] == 4


def test_verify_is_reproducible(write_document):
    first = report(invoke(write_document, HERMITIZE, "verify", "--seed", "5", "--samples", "5"))
    second = report(invoke(write_document, HERMITIZE, "verify", "--seed", "5", "--samples", "5"))
    assert first == second


def test_verify_tolerance_violation_exits_3(write_document, monkeypatch):
    monkeypatch.setattr(hermap.cli, "reconstruction_error", lambda *args, **kwargs: 1.0)
    result = invoke(write_document, HERMITIZE, "verify", "--samples", "3")
    assert result.exit_code == 3
    assert report(result)["passed"] is False


def test_domain_error_exits_2(write_document):
    choi = np.zeros((4, 4))
    choi[0, 1] = 1.0
    document = {"m": 2, "n": 2, "choi": {"re": choi.tolist(), "im": np.zeros((4, 4)).tolist()}}
    result = invoke(write_document, document, "analyze")
    assert result.exit_code == 2
    assert "not Hermitian" in result.output


def test_document_error_exits_2(write_document):
    result = invoke(write_document, {"m": 2, "n": 2}, "analyze")
    assert result.exit_code == 2
    assert "ERROR" in result.output


def test_bad_partition_exits_2(write_document):
    result = invoke(write_document, BLOCKS, "reduce", "--partition", "3,1/3,1")
    assert result.exit_code == 2


def test_tolerance_flags_override_document(write_document):
    choi = np.array([[1, 0.1], [0, 1]])
    document = {"m": 1, "n": 2, "choi": {"re": choi.tolist(), "im": np.zeros((2, 2)).tolist()}, "tol": {"recon": 0.5}}
    loose = {**TRANSPOSE, "tol": {"recon": 0.5}}
    assert invoke(write_document, document, "analyze").exit_code == 0
    assert invoke(write_document, document, "--tol-recon", "1e-9", "analyze").exit_code == 2
    assert invoke(write_document, loose, "--tol", "1e-12", "analyze").exit_code == 0


def test_list_names_builtins():
    data = report(runner.invoke(app, ["list"]))
    names = [entry["name"] for entry in data["builtins"]]
    assert "highmult" in names and "block_example" in names


def test_examples_command_passes():
    result = runner.invoke(app, ["examples"])
    assert result.exit_code == 0, result.output
    data = report(result)
    assert data["failed"] == 0
    assert data["passed"] == len(load_examples()) + 1


def test_examples_command_reports_wrong_figures(tmp_path):
    examples = {
        "examples": [
            {
                "name": "wrong-transpose",
                "document": TRANSPOSE,
                "expect": {"dcp": 2, "bound": math.sqrt(2)},
            }
        ]
    }
    path = tmp_path / "examples.json"
    path.write_text(json.dumps(examples, indent=2) + "\n", encoding="utf-8")
    result = runner.invoke(app, ["examples", "--file", str(path)])
    assert result.exit_code == 3
    data = report(result)
    assert data["failed"] == 1
    assert len(data["examples"][0]["failures"]) == 2


def test_main_maps_usage_errors_to_1(capsys):
    assert main(["no-such-command"]) == 1
    assert main(["analyze", "--no-such-flag"]) == 1
    assert main(["--tol", "-1", "analyze"]) == 1


def test_main_returns_command_exit_codes(write_document, capsys):
    assert main(["--input", str(write_document(TRANSPOSE)), "analyze"]) == 0
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["dcp"] == pytest.approx(1.0)
    assert main(["--input", str(write_document({"m": 2, "n": 2})), "analyze"]) == 2


def test_choi_hermitian_flag_follows_command_line_tolerance(write_document):
    choi = np.eye(4)
    choi[0, 1] = 1e-6
    document = {"m": 2, "n": 2, "choi": {"re": choi.tolist(), "im": np.zeros((4, 4)).tolist()}}
    strict = report(invoke(write_document, document, "choi"))
    assert strict["is_hermitian"] is False
    assert strict["max_asymmetry"] == pytest.approx(1e-6)
    loose = invoke(write_document, document, "--tol-recon", "1e-3", "choi")
    assert report(loose)["is_hermitian"] is True
    assert invoke(write_document, document, "--tol-recon", "1e-3", "analyze").exit_code == 0


def test_zero_tolerance_still_analyzes(write_document):
    result = invoke(write_document, TRANSPOSE, "--tol", "0", "analyze")
    assert result.exit_code == 0, result.output
    data = report(result)
    assert data["dcp"] == pytest.approx(1.0)
    assert data["multiplicity_k"] == 1


def test_absolute_thresholds(write_document):
    choi = np.diag([100.0, -5e-8])
    document = {"m": 1, "n": 2, "choi": {"re": choi.tolist(), "im": np.zeros((2, 2)).tolist()}}
    assert report(invoke(write_document, document, "analyze"))["is_cp"] is True
    assert report(invoke(write_document, document, "--absolute", "analyze"))["is_cp"] is False
    absolute = {**document, "tol": {"relative": False}}
    assert report(invoke(write_document, absolute, "analyze"))["is_cp"] is False
    assert report(invoke(write_document, absolute, "--tol", "1e-7", "analyze"))["is_cp"] is True
