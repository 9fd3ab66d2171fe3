import json

import numpy as np
import pytest

from compfid import cli, fidelity, records
from compfid.records import MeasurementRecord

REPORT_KEYS = ["dim", "f_primary", "f_complementary", "lower_bound", "lower_bound_clamped",
               "upper_bound", "f_process", "avg_fidelity_lower", "avg_fidelity_upper", "epsilon",
               "concurrence_lower", "success_trace", "stderr_primary", "stderr_complementary"]

CNOT_Z = {"00": "00", "01": "01", "10": "11", "11": "10"}
CNOT_X = {"00": "00", "01": "11", "10": "10", "11": "01"}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_records(tmp_path, f_z, f_x, z_basis="computational", x_basis="hadamard"):
    paths = []
    for name, basis, table, vals in (("z", z_basis, CNOT_Z, f_z), ("x", x_basis, CNOT_X, f_x)):
        rows = {n: {m: v} for (n, m), v in zip(table.items(), vals)}
        rec = MeasurementRecord(4, basis, basis, rows)
        path = tmp_path / f"{name}.json"
        records.dump_record(rec, path)
        paths.append(str(path))
    return paths


def test_estimate_ideal_cnot(tmp_path, capsys):
    a, b = write_records(tmp_path, [1] * 4, [1] * 4)
    code, out, _ = run(capsys, "estimate", "--target", "cnot", "--records", a, b)
    assert code == 0
    rep = json.loads(out)
    assert list(rep) == REPORT_KEYS
    assert rep["lower_bound"] == 1 and rep["upper_bound"] == 1
    assert rep["concurrence_lower"] == 1
    assert rep["f_process"] is None and rep["success_trace"] is None


def test_estimate_arithmetic(tmp_path, capsys):
    a, b = write_records(tmp_path, [1, 1, 0.9, 0.9], [0.6] * 4)
    code, out, _ = run(capsys, "estimate", "--target", "cnot", "--records", a, b)
    rep = json.loads(out)
    assert code == 0
    assert rep["f_primary"] == pytest.approx(0.95, abs=1e-15)
    assert rep["lower_bound"] == pytest.approx(0.55, abs=1e-12)
    assert rep["upper_bound"] == pytest.approx(0.6, abs=1e-15)
    assert rep["concurrence_lower"] == pytest.approx(0.1, abs=1e-12)


def test_simulate_then_estimate_dephased_cnot(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--target", "cnot", "--noise",
                       "kind=dephasing,strength=0.1,qubits=0", "--out-dir", str(tmp_path))
    assert code == 0
    sim = json.loads(out)
    assert sim["f_primary"] == pytest.approx(1, abs=1e-12)
    assert sim["f_complementary"] == pytest.approx(0.9, abs=1e-12)
    assert sim["f_process"] == pytest.approx(0.9, abs=1e-12)
    assert json.loads((tmp_path / "report.json").read_text()) == sim

    code, out, _ = run(capsys, "estimate", "--target", "cnot", "--records",
                       str(tmp_path / "record_primary.json"),
                       str(tmp_path / "record_complementary.json"))
    assert code == 0
    est = json.loads(out)
    for key in ("f_primary", "f_complementary", "lower_bound", "upper_bound"):
        assert est[key] == sim[key]
    assert est["lower_bound"] == pytest.approx(0.9, abs=1e-12)


def test_estimate_validation_exit_2(tmp_path, capsys):
    a, b = write_records(tmp_path, [1, 1, 1.2, 1], [1] * 4)
    code, _, err = run(capsys, "estimate", "--target", "cnot", "--records", a, b)
    assert code == 2
    assert "range" in err
    code, _, err = run(capsys, "estimate", "--target", "cnot", "--records", a, str(tmp_path / "nope"))
    assert code == 2


def test_estimate_not_classical_exit_3(tmp_path, capsys):
    # Z records are fine, but CNOT does not permute the Fourier basis of dim 4
    a, b = write_records(tmp_path, [1] * 4, [1] * 4, x_basis="fourier")
    code, _, err = run(capsys, "estimate", "--target", "cnot", "--records", a, b)
    assert code == 3
    assert "not classical" in err


def test_estimate_biased_pair_exit_4(tmp_path, capsys):
    a, _ = write_records(tmp_path, [1] * 4, [1] * 4)
    code, _, err = run(capsys, "estimate", "--target", "cnot", "--records", a, a)
    assert code == 4
    code, _, _ = run(capsys, "simulate", "--target", "identity", "--dim", "2",
                     "--basis-pair", "computational,computational")
    assert code == 4


def test_simulate_sandwich_failure_exit_5(capsys, monkeypatch):
    monkeypatch.setattr(fidelity, "process_fidelity", lambda ch, u0: 1.5)
    code, _, err = run(capsys, "simulate", "--target", "identity", "--noise",
                       "kind=dephasing,strength=0.3")
    assert code == 5
    assert "consistency" in err


def test_simulate_examples(capsys):
    code, out, _ = run(capsys, "simulate", "--target", "cnot")
    assert code == 0
    rep = json.loads(out)
    for key in ("f_primary", "f_complementary", "lower_bound", "upper_bound", "f_process"):
        assert rep[key] == pytest.approx(1, abs=1e-12)

    code, out, _ = run(capsys, "simulate", "--target", "identity", "--dim", "2",
                       "--noise", "kind=dephasing,strength=0.3")
    rep = json.loads(out)
    assert (rep["f_primary"], rep["f_complementary"]) == pytest.approx((1, 0.7), abs=1e-12)
    assert (rep["lower_bound"], rep["upper_bound"]) == pytest.approx((0.7, 0.7), abs=1e-12)
    assert rep["f_process"] == pytest.approx(0.7, abs=1e-12)

    code, out, _ = run(capsys, "simulate", "--target", "cnot", "--noise",
                       "kind=depolarizing,strength=1,qubits=whole")
    rep = json.loads(out)
    assert rep["f_primary"] == pytest.approx(0.25, abs=1e-12)
    assert rep["f_complementary"] == pytest.approx(0.25, abs=1e-12)
    assert rep["f_process"] == pytest.approx(1 / 16, abs=1e-12)


def test_simulate_records_uniform_for_full_depolarizing(tmp_path, capsys):
    run(capsys, "simulate", "--target", "cnot", "--noise",
        "kind=depolarizing,strength=1,qubits=whole", "--out-dir", str(tmp_path))
    rec = records.load_record(tmp_path / "record_complementary.json")
    for row in rec.rows.values():
        assert max(abs(p - 0.25) for p in row.values()) < 1e-12


def test_simulate_qft_uses_image_basis(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--target", "qft", "--dim", "3", "--noise",
                       "kind=depolarizing,strength=0.3", "--out-dir", str(tmp_path))
    assert code == 0
    sim = json.loads(out)
    rec = records.load_record(tmp_path / "record_primary.json")
    assert rec.output_basis.startswith("image:")
    code, out, _ = run(capsys, "estimate", "--target", "qft", "--dim", "3", "--records",
                       str(tmp_path / "record_primary.json"),
                       str(tmp_path / "record_complementary.json"))
    assert code == 0
    assert json.loads(out)["f_primary"] == sim["f_primary"]


def test_simulate_shots_reports_stderr(capsys):
    code, out, _ = run(capsys, "simulate", "--target", "cnot", "--noise",
                       "kind=dephasing,strength=0.2,qubits=0", "--shots", "1000", "--seed", "3")
    rep = json.loads(out)
    assert code == 0
    assert rep["stderr_complementary"] > 0
    assert abs(rep["f_complementary"] - 0.8) < 5 * rep["stderr_complementary"]


def test_text_output_interval_sentence(capsys):
    code, out, _ = run(capsys, "simulate", "--target", "identity", "--noise",
                       "kind=dephasing,strength=0.2", "--format", "text")
    assert code == 0
    assert "interval of width epsilon" in out
    assert "[0.800000, 0.800000]" in out
    code, out, _ = run(capsys, "simulate", "--target", "identity", "--noise",
                       "kind=depolarizing,strength=1", "--format", "text")
    assert "interval of width epsilon" not in out


def test_bad_noise_is_invalid_input(capsys):
    code, _, err = run(capsys, "simulate", "--target", "identity", "--noise", "strength=0.1")
    assert code == 2
    code, _, _ = run(capsys, "simulate", "--target", "identity", "--noise",
                     "kind=dephasing,strength=2")
    assert code == 2
    code, _, _ = run(capsys, "simulate", "--target", "not-a-gate")
    assert code == 2


def test_matrix_file_target(tmp_path, capsys):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"dim": 2, "matrix": [[float(x), 0.0] for x in h.reshape(-1)]}))
    code, out, _ = run(capsys, "simulate", "--target", str(path), "--noise",
                       "kind=dephasing,strength=0.1")
    assert code == 0
    rep = json.loads(out)
    assert rep["f_process"] == pytest.approx(0.9, abs=1e-12)


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--dims", "2,3", "--channels", "20")
    assert code == 0
    assert "all properties passed" in out
    code, out, _ = run(capsys, "verify", "--dims", "2", "--channels", "20", "--format", "json")
    assert json.loads(out)["passed"] is True


def test_verify_seed_changes_residuals_not_verdicts(capsys):
    outs = []
    for seed in ("1", "2"):
        code, out, _ = run(capsys, "verify", "--dims", "2,3", "--channels", "30", "--seed", seed,
                           "--format", "json")
        assert code == 0
        outs.append(json.loads(out))
    worst = [[p["worst"] for p in o["properties"]] for o in outs]
    assert worst[0] != worst[1]


def test_verify_detects_faulty_bound(capsys, monkeypatch):
    def wrong_bounds(f1, f2):
        return f1 + f2 - 0.9, min(f1, f2)
    monkeypatch.setattr(fidelity, "bounds", wrong_bounds)
    code, out, _ = run(capsys, "verify", "--dims", "2", "--channels", "20")
    assert code == 1
    assert "[FAIL] bound-sandwich" in out
