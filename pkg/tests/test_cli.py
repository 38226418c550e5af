import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from lcmstable import StableParams, forward_params, load_model, pdf_from_cf, posterior_params
from lcmstable.cli import run

FIXTURES = Path(__file__).parent.parent / "fixtures"
CDMA = str(FIXTURES / "cdma_a3.json")


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_cdma(capsys):
    code, out, _ = call(capsys, "check", "--model", CDMA)
    assert code == 0
    d = json.loads(out)
    assert d["rho_absR"] == pytest.approx(0.9008, abs=1e-3)
    assert d["rho_absR_alpha"] == pytest.approx(0.6875, abs=1e-3)
    assert d["condition1_holds"] and d["condition2_holds"]


def test_check_csv(capsys):
    code, out, _ = call(capsys, "check", "--model", CDMA, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert rows[0]["condition1_holds"] == "true" and float(rows[0]["rho_R"]) < 1


def test_posterior_matches_library(capsys):
    code, out, _ = call(capsys, "posterior", "--model", CDMA)
    assert code == 0
    d = json.loads(out)
    lib = posterior_params(load_model(CDMA))
    assert d["side"] == "x" and d["labels"] == lib.labels
    assert d["params"] == [[p.beta, p.gamma, p.delta] for p in lib.x_given_y]


def test_posterior_csv_is_exact(capsys):
    _, out, _ = call(capsys, "posterior", "--model", CDMA, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    lib = posterior_params(load_model(CDMA)).x_given_y
    for row, p in zip(rows, lib):
        assert StableParams(*(float(row[k]) for k in ("alpha", "beta", "gamma", "delta"))) == p


def test_forward_round_trip(capsys, tmp_path):
    src = str(FIXTURES / "cdma_a3_source.json")
    out_path = tmp_path / "y.json"
    assert call(capsys, "forward", "--model", src, "--out", str(out_path))[0] == 0
    d = json.loads(out_path.read_text())
    lib = forward_params(load_model(src))
    assert d["side"] == "y" and d["params"] == [[p.beta, p.gamma, p.delta] for p in lib]
    # the output is itself a loadable model
    assert load_model(out_path).params == lib


def test_jacobi_and_trace(capsys, tmp_path):
    out = tmp_path / "post.json"
    code, _, _ = call(capsys, "jacobi", "--model", CDMA, "--tol", "1e-12", "--out", str(out))
    assert code == 0
    d = json.loads(out.read_text())
    exact = posterior_params(load_model(CDMA)).x_given_y
    for row, p in zip(d["params"], exact):
        assert row == pytest.approx([p.beta, p.gamma, p.delta], abs=1e-9)
    trace = (tmp_path / "post.json.trace.csv").read_text().splitlines()
    assert trace[0] == "iteration,residual_u,residual_v,residual_w"
    assert len(trace) - 1 == d["stats"]["iterations"]


def test_jacobi_not_converged_exit_code(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    code, _, err = call(
        capsys, "jacobi", "--model", str(FIXTURES / "singular.json"), "--max-iter", "20", "--trace", str(trace), "--format", "json"
    )
    assert code == 2
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "NotConvergedError" and payload["exit_code"] == 2
    assert len(trace.read_text().splitlines()) == 21


def test_tree_chain(capsys):
    path = str(FIXTURES / "tree_chain.json")
    code, out, _ = call(capsys, "tree", "--model", path, "--root", "2")
    assert code == 0
    exact = posterior_params(load_model(path)).x_given_y
    for row, p in zip(json.loads(out)["params"], exact):
        assert row == pytest.approx([p.beta, p.gamma, p.delta], abs=1e-9)


def test_tree_on_cycle_fails(capsys):
    # a cyclic graph is invalid input for this command
    assert call(capsys, "tree", "--model", CDMA)[0] == 1


def test_pdf_csv(capsys):
    code, out, _ = call(capsys, "pdf", "--alpha", "1", "--range", "-8", "8", "--n", "1024")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x,density" and len(lines) == 1025
    grid = pdf_from_cf(StableParams(1, 0, 1, 0), -8, 8, 1024)
    assert out == grid.to_csv()


def test_pdf_json(capsys):
    code, out, _ = call(capsys, "pdf", "--alpha", "2", "--gamma", "0.5", "--n", "64", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["x0"] == -8.0 and len(d["values"]) == 64


def test_oracle(capsys):
    code, out, _ = call(capsys, "oracle")
    rows = json.loads(out)
    assert code == 0 and {r["oracle"] for r in rows} == {"convolution", "slicing"}
    assert max(r["max_abs_err"] for r in rows) <= 1e-9


def test_synth_and_flow_report(capsys, tmp_path):
    assert call(capsys, "synth", "--n", "30", "--rho", "0.05", "--seed", "3", "--out", str(tmp_path))[0] == 0
    for name in ("flows.csv", "topology.csv", "partition.json", "model.json"):
        assert (tmp_path / name).exists()
    args = ["--flows", str(tmp_path / "flows.csv"), "--topology", str(tmp_path / "topology.csv"),
            "--partition", str(tmp_path / "partition.json")]
    code, out, err = call(capsys, "flow-report", *args)
    assert code == 0
    exact = json.loads(out)
    code, out, _ = call(capsys, "flow-report", *args, "--method", "jacobi", "--tol", "1e-13")
    approx = json.loads(out)
    assert [r["node_id"] for r in exact["rows"]] == [r["node_id"] for r in approx["rows"]]
    for a, b in zip(exact["rows"], approx["rows"]):
        assert a["delta"] == pytest.approx(b["delta"], abs=1e-10)
    code, out, err = call(capsys, "flow-report", *args, "--format", "csv")
    assert out.splitlines()[0].startswith("node_id\talpha") and "storage:" in err


def test_flow_report_fixture(capsys):
    d = FIXTURES / "flows_2x2"
    code, out, _ = call(
        capsys, "flow-report", "--flows", str(d / "flows.csv"), "--topology", str(d / "topology.csv"),
        "--partition", str(d / "partition.json"),
    )
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["node_id"] for r in rows] == ["h1", "h2"]
    assert rows[0]["gamma"] == pytest.approx(1e-4, rel=1e-9) and rows[1]["delta"] == pytest.approx(0.8, abs=1e-12)


def test_outputs_are_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert call(capsys, "synth", "--n", "40", "--seed", "5", "--out", str(d))[0] == 0
    for name in ("flows.csv", "topology.csv", "partition.json", "model.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    first = call(capsys, "jacobi", "--model", str(a / "model.json"), "--threads", "1")[1]
    second = call(capsys, "jacobi", "--model", str(a / "model.json"), "--threads", "4")[1]
    assert first == second


@pytest.mark.parametrize(
    "argv, code",
    [
        (["bogus"], 1),
        (["posterior"], 1),
        (["check", "--model", CDMA, "--threads", "0"], 1),
        (["pdf", "--alpha", "2.5"], 1),
        (["pdf", "--alpha", "1", "--n", "100"], 1),
        (["forward", "--model", CDMA], 1),
        (["posterior", "--model", str(FIXTURES / "singular.json")], 2),
        (["posterior", "--model", "/nonexistent/model.json"], 3),
        (["synth", "--n", "1"], 1),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert call(capsys, *argv)[0] == code


def test_json_error_on_usage_error(capsys):
    code, _, err = call(capsys, "posterior", "--format", "json")
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 1


def test_help(capsys):
    code, out, _ = call(capsys, "--help")
    assert code == 0 and "jacobi" in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "lcmstable", "check", "--model", CDMA], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "rho_R" in proc.stdout
