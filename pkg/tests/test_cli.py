import json
import subprocess
import sys
from pathlib import Path

import pytest

from mucyclo.cli import main

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    return code, json.loads(out)


@pytest.mark.parametrize("argv, code", [
    (["check", "--system", "nw", str(CORPUS / "pi.json")], 0),
    (["check", "--system", "nw", "pi"], 0),
    (["check", "--system", "nw", "mu_self"], 1),
    (["check", "--system", "clo", "nu_self"], 0),
    (["check", "--system", "clo", "rho0_completed"], 1),
    (["check", "--system", "clo", "pi"], 2),
    (["check", "--system", "nw", "no/such/file.json"], 2),
    (["search", "--system", "nw", "Phi"], 0),
    (["search", "--system", "clo", "Phi"], 1),
    (["search", "--system", "clo", "--budget", "10", "Phi"], 2),
    (["search", "--system", "nw", "--max-depth", "0", "Phi"], 2),
    (["valid", "--max-states", "1", "phi_x"], 1),
    (["valid", "--max-states", "2", "Phi"], 0),
    (["countermodel", "--max-states", "1", "psi_y"], 1),
    (["adisjunctive", "Phi"], 1),
    (["adisjunctive", "nu x. p | <>x"], 0),
    (["closure", "Phi"], 0),
    (["parse", "p &"], 2),
    (["parse", "nu x. <>x"], 0),
    ([], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_check_json_reports_mismatch_at_c(capsys):
    code, data = run_json(capsys, "check", "--system", "clo", "rho0_completed")
    assert code == 1
    assert data["verdict"] == "rejected"
    kinds = {d["kind"] for d in data["diagnostics"]}
    assert "discharge-mismatch" in kinds


def test_check_json_trace_stats(capsys):
    code, data = run_json(capsys, "check", "--system", "nw", "pi")
    assert code == 0 and data["trace"]["method"] == "ramsey"


def test_search_clo_reports_fragment(capsys):
    code, out, _ = run(capsys, "search", "--system", "clo", "Phi")
    assert code == 1
    assert "ExhaustedWithinBounds" in out
    assert "fragment:" in out and "max_clo" in out


def test_search_writes_proof(capsys, tmp_path):
    target = tmp_path / "phi.json"
    assert run(capsys, "search", "--system", "nw", "-o", str(target), "Phi")[0] == 0
    assert run(capsys, "check", "--system", "nw", str(target))[0] == 0


def test_translate_round_trip(capsys, tmp_path):
    target = tmp_path / "nw.json"
    assert run(capsys, "translate", "nu_self", "-o", str(target))[0] == 0
    assert run(capsys, "check", "--system", "nw", str(target))[0] == 0
    assert run(capsys, "translate", "rho0")[0] == 1


def test_translate_to_stdout(capsys):
    code, out, _ = run(capsys, "translate", "lem")
    assert code == 0
    assert json.loads(out)["system"] == "nw"


def test_closure_json(capsys):
    code, data = run_json(capsys, "closure", "Phi")
    assert code == 0 and data["size"] == 11


def test_adisjunctive_json(capsys):
    code, data = run_json(capsys, "adisjunctive", "Phi")
    assert code == 1
    assert data["disjunction"].startswith("([] nu x.")


def test_countermodel_json(capsys):
    code, data = run_json(capsys, "countermodel", "--max-states", "1", "phi_x")
    assert code == 1
    assert data["countermodel"]["model"].startswith("states 1;")


def test_paper_without_battery(capsys):
    code, data = run_json(capsys, "paper", "--no-battery")
    assert code == 0 and data["ok"]


def test_corpus_listing_and_write(capsys, tmp_path):
    code, data = run_json(capsys, "corpus")
    assert code == 0 and len(data["artifacts"]) == 19
    code, out, _ = run(capsys, "corpus", "--write", str(tmp_path))
    assert code == 0
    assert (tmp_path / "pi.json").read_bytes() == (CORPUS / "pi.json").read_bytes()


def test_errors_go_to_stderr(capsys):
    code, out, err = run(capsys, "parse", "nu x.")
    assert code == 2 and out == "" and err.startswith("error:")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mucyclo", "closure", "nu x. x"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("1 formulas")
