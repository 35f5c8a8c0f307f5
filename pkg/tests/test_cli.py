import csv
import io
import json
import subprocess
import sys

import pytest

from hamsynth.cli import main, render
from hamsynth.experiments import ExperimentConfig, RUNNERS, run_table1

FAST_ARGS = {
    "table1": ["--p", "0.99"],
    "commutator-sweep": ["--dt-prime-points", "3"],
    "gse-fidelity": ["--dt-prime-points", "2"],
    "timing-compare": ["--n", "1", "2", "--samples", "2000"],
    "teleport-fidelity": ["--n", "2", "3"],
    "purify-curve": ["--p-l", "0.99", "0.999"],
    "compare": [],
}


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_every_experiment_has_fast_args():
    assert set(FAST_ARGS) == set(RUNNERS)


@pytest.mark.parametrize("name", sorted(FAST_ARGS))
def test_experiments_are_deterministic(name, tmp_path):
    paths = []
    for i in range(2):
        path = tmp_path / f"{name}-{i}.csv"
        assert main([name, "--seed", "3", "--out", str(path)] + FAST_ARGS[name]) == 0
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].stat().st_size > 0


def test_csv_has_header_and_twelve_digits(capsys):
    code, out, _ = run(["commutator-sweep", "--kappa0", "0.01", "--dt-prime-points", "2"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    assert {"dt_prime", "one_minus_f", "one_minus_f_estimate", "lne", "lne_estimate"} <= set(rows[0])
    mantissa = rows[0]["one_minus_f"].split("e")[0].replace(".", "").lstrip("0")
    assert len(mantissa) <= 12


def test_noiseless_sweep_row(capsys):
    code, out, _ = run(["commutator-sweep", "--kappa0", "0", "--dt-prime-points", "2"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    for r in rows:
        assert float(r["one_minus_f"]) < 5 * float(r["dt_prime"]) ** 1.5
        assert r["lne_ratio"] == ""


def test_json_output_is_versioned(capsys):
    code, out, _ = run(["table1", "--p", "0.99", "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1 and doc["experiment"] == "table1"
    methods = {r["method"]: r["fidelity"] for r in doc["rows"]}
    assert set(methods) == {"analytic", "G1", "G2", "C", "H2-G2"}
    assert abs(methods["analytic"] - 0.9851) < 5e-4


def test_comparison_report_orderings(capsys):
    code, out, _ = run(["compare", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert all(doc["points"][0]["orderings"].values())


def test_comparison_report_as_csv(capsys):
    code, out, _ = run(["compare"], capsys)
    assert code == 0 and out.startswith("key,value\n")
    assert "points[0].orderings.gse_beats_commutator_at_gate,true" in out


def test_error_line_and_exit_code(capsys):
    code, out, err = run(["purify-curve", "--p-l", "1.5"], capsys)
    assert code == 1 and out == ""
    doc = json.loads(err.strip())
    assert doc["error"] == "ValueError" and doc["experiment"] == "purify-curve"


def test_bad_grid_rejected():
    with pytest.raises(ValueError):
        ExperimentConfig("timing-compare", sigma=())
    with pytest.raises(ValueError):
        ExperimentConfig("commutator-sweep", dt_prime_min=1e-2, dt_prime_max=1e-4)


def test_render_handles_missing_cells():
    text = render("x", [{"a": 1.0}, {"a": 2.0, "b": None}], "csv")
    assert text == "a,b\n1,\n2,\n"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hamsynth.cli", "gse-fidelity", "--dt-prime-points", "1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0].startswith("kappa0,noise,dt_prime")


def test_table1_default_grid():
    rows = run_table1()
    assert sorted({r["p"] for r in rows}) == [0.9, 0.99, 0.999]
