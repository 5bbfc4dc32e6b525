import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hololoop import cli, gatelog, loopsynth, matcore
from hololoop.errors import NoConvergence, ValidationError

PI = np.pi


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    return code, json.loads(out) if out else None, err


def strip_timing(text):
    report = json.loads(text)
    report.pop("timing")
    return report


# ---------------------------------------------------------------- examples


def test_synth_pauli_z(capsys):
    code, rep, _ = run_json(capsys, "synth", "--gate", "pauli_z", "--variant", "doubled")
    assert code == 0
    plan = rep["results"]["synth"]["plan"]
    np.testing.assert_allclose(plan["nu"], [PI, PI], atol=1e-15)
    # components follow ascending lambda = (-pi, 0)
    np.testing.assert_allclose(plan["lambda"], [-PI, 0], atol=1e-14)
    np.testing.assert_allclose(plan["alpha"], [0, PI], atol=1e-7)
    assert plan["n"] == [1, 1]
    assert rep["results"]["synth"]["closure_residual"] <= 1e-9
    assert rep["checks"]["closure"]["passed"]


def test_verify_hadamard(capsys):
    code, rep, _ = run_json(capsys, "verify", "--gate", "hadamard", "--wilson-steps", "4096")
    assert code == 0
    res = rep["results"]["verify"]
    assert res["target_distance"] <= 2e-3
    assert [r["N"] for r in res["wilson"]] == [4096, 8192]
    assert 1.6 <= res["raw_convergence_ratio"] <= 2.4
    assert rep["config"]["numeric"]["tolerances"]["wilson"] == cli.TOL_WILSON_ONE_QUBIT


def test_simulate_cnot_csv(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--gate", "cnot", "--T", "50,100,200", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["T", "fidelity", "leakage"]
    data = np.array(rows[1:], dtype=float)
    np.testing.assert_array_equal(data[:, 0], [50, 100, 200])
    infid = 1 - data[:, 1]
    for i in range(len(infid)):
        assert max(infid[i:]) <= infid[i] + cli.ENVELOPE_SLACK
    assert np.all((data[:, 2] >= -1e-15) & (data[:, 2] <= 1))
    # T = 200 is not enough for the default 0.97 fidelity floor
    assert code in (0, 2)


def test_simulate_json_rows(capsys):
    code, rep, _ = run_json(capsys, "simulate", "--gate", "pauli_z", "--T", "100,400")
    assert code == 0
    runs = rep["results"]["simulate"]["runs"]
    assert [r["T"] for r in runs] == [100, 400]
    assert {"fidelity", "leakage", "steps", "transport_fidelity", "column_fidelity"} <= set(runs[0])
    assert set(rep["checks"]) == {"fidelity", "leakage", "envelope"}


def test_embed(capsys):
    code, rep, _ = run_json(capsys, "embed", "--gate", "cnot", "--n-main", "3", "--targets", "3,1")
    assert code == 0
    res = rep["results"]["embed"]
    assert res["dim"] == 16 and res["targets"] == [3, 1]
    assert res["residual"] <= 5e-3 and res["spectator_residual"] <= 1e-6
    assert res["ancilla_leak"] <= 1e-9


def test_coeffs_csv(capsys):
    code, out, _ = run_cli(capsys, "coeffs", "--gate", "hadamard", "--terms", "6", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im"]
    assert [r[0] for r in rows[1:]] == [str(i) for i in range(len(rows) - 1)]
    # c_0 = 0, c_1 = 1
    assert float(rows[1][3]) == 0 and float(rows[2][3]) == 1


def test_report_with_layout(capsys):
    code, rep, _ = run_json(
        capsys, "report", "--gate", "pauli_z", "--T", "400", "--n-main", "2", "--targets", "2"
    )
    assert code == 0
    assert set(rep["results"]) == {"synth", "verify", "simulate", "embed"}
    assert rep["passed"] is True


# ---------------------------------------------------------------- report contents


def test_report_echoes_defaults(capsys):
    code, rep, _ = run_json(capsys, "verify", "--gate", "t_gate")
    cfg = rep["config"]
    assert cfg["variant"] == cli.DEFAULT_VARIANT
    assert cfg["numeric"]["wilson_steps"] == cli.DEFAULT_WILSON_STEPS
    assert cfg["numeric"]["T_list"] == cli.DEFAULT_T_LIST
    assert cfg["numeric"]["grid"] == cli.DEFAULT_GRID
    assert cfg["numeric"]["tolerances"]["closure"] == cli.DEFAULT_TOL_CLOSURE
    assert cfg["numeric"]["tolerances"]["fidelity"] == cli.DEFAULT_TOL_FIDELITY
    assert cfg["numeric"]["tolerances"]["leakage"] == cli.DEFAULT_TOL_LEAKAGE
    assert rep["backend"] in ("cython", "python")
    assert rep["timing"]["wall_clock_s"] >= 0
    assert rep["gate"]["name"] == "t_gate"


def test_complex_serialization(capsys):
    _, rep, _ = run_json(capsys, "synth", "--gate", "phase_s")
    u = rep["gate"]["U"]
    assert u[1][1] == {"re": 0.0, "im": 1.0}
    x = np.array([[complex(e["re"], e["im"]) for e in row] for row in rep["results"]["synth"]["X"]])
    plan = loopsynth.plan_doubled(gatelog.gate_spec("phase_s"))
    np.testing.assert_array_equal(x, plan.X)


def test_deterministic_reports(capsys):
    argv = ["verify", "--gate", "swap", "--wilson-steps", "256"]
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert strip_timing(first) == strip_timing(second)
    a = json.loads(first)
    b = json.loads(second)
    a.pop("timing")
    b.pop("timing")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run_cli(capsys, "synth", "--gate", "swap", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["command"] == "synth"


# ---------------------------------------------------------------- config


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = {
        "command": "verify",
        "gate": "pauli_x",
        "numeric": {"wilson_steps": 512, "tolerances": {"wilson": 0.5}},
    }
    path = tmp_path / "job.json"
    path.write_text(json.dumps(cfg))
    code, rep, _ = run_json(capsys, "run", "--config", str(path))
    assert code == 0 and rep["config"]["numeric"]["wilson_steps"] == 512
    code, rep, _ = run_json(capsys, "verify", "--config", str(path), "--wilson-steps", "1024")
    assert rep["config"]["numeric"]["wilson_steps"] == 1024
    assert rep["config"]["numeric"]["tolerances"]["wilson"] == 0.5


def test_inline_matrix(tmp_path, capsys):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    path = tmp_path / "u.json"
    path.write_text(json.dumps(h.tolist()))
    code, rep, _ = run_json(capsys, "verify", "--matrix-file", str(path))
    assert code == 0
    assert rep["results"]["verify"]["target_distance"] <= 2e-3
    cfg = cli.JobConfig.from_dict(
        {"command": "synth", "gate": [[{"re": 0, "im": 0}, {"re": 1, "im": 0}], [1, 0]]}
    )
    assert cli.run(cfg)[0] == 0


@pytest.mark.parametrize(
    "data",
    [
        {"command": "synth", "gate": "hadamard", "colour": 1},
        {"command": "synth", "gate": "hadamard", "numeric": {"steps": 3}},
        {"command": "synth", "gate": "hadamard", "numeric": {"tolerances": {"wilsn": 1}}},
        {"command": "synth", "gate": "hadamard", "layout": {"n_main": 2, "targets": [1], "x": 0}},
        {"command": "launch", "gate": "hadamard"},
        {"command": "synth", "gate": "hadamard", "variant": "tripled"},
        {"command": "synth", "gate": "hadamard", "output": {"format": "csv"}},
        {"command": "synth", "gate": "hadamard", "windings": "1,1"},
        {"command": "verify", "gate": "hadamard", "numeric": {"wilson_steps": 4}},
        {"command": "simulate", "gate": "hadamard", "numeric": {"T_list": [-1]}},
        {"command": "embed", "gate": "hadamard"},
        {"command": "synth"},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ValidationError):
        cli.JobConfig.from_dict(data)


def test_config_round_trip():
    cfg = cli.JobConfig.from_dict({"command": "embed", "gate": "cz", "layout": {"n_main": 3, "targets": [1, 2]}})
    again = cli.JobConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


# ---------------------------------------------------------------- exit codes


@pytest.mark.parametrize(
    "argv",
    [
        ["synth", "--gate", "toffoli"],
        ["synth", "--gate", "hadamard", "--format", "csv"],
        ["synth", "--gate", "hadamard", "--bogus"],
        ["synth", "--gate", "hadamard", "--windings", "1,0"],
        ["embed", "--gate", "cnot", "--n-main", "2", "--targets", "2,3"],
        ["embed", "--gate", "cnot", "--n-main", "2", "--targets", "1,1"],
        ["run"],
    ],
)
def test_exit_invalid(argv, capsys):
    code, _, err = run_cli(capsys, *argv)
    assert code == cli.EXIT_INVALID
    assert err


def test_exit_invalid_subprocess():
    res = subprocess.run(
        [sys.executable, "-m", "hololoop", "synth", "--gate", "nope"], capture_output=True, text=True
    )
    assert res.returncode == 1 and "invalid input" in res.stderr


def test_exit_check_failure(capsys):
    code, rep, err = run_json(capsys, "verify", "--gate", "t_gate", "--wilson-steps", "64", "--tol-wilson", "1e-9")
    assert code == cli.EXIT_CHECK
    assert rep["checks"]["wilson"]["passed"] is False and rep["passed"] is False
    assert "wilson" in err


def test_exit_numerical_failure(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NoConvergence("Jacobi sweeps exhausted")

    monkeypatch.setattr(matcore, "eig_hermitian", boom)
    code, _, err = run_cli(capsys, "synth", "--gate", "hadamard")
    assert code == cli.EXIT_NUMERICAL and "numerical" in err


# ---------------------------------------------------------------- loop samples


def pauli_z_plan():
    return loopsynth.plan_doubled(gatelog.gate_spec("pauli_z"))


def test_samples_grid_two(tmp_path):
    p = pauli_z_plan()
    path = tmp_path / "h.csv"
    cli.export_loop_samples(p, 2, path)
    t, h, dim, k = cli.read_loop_samples(path)
    np.testing.assert_array_equal(t, [0, 1])
    for m in h:
        assert np.linalg.norm(m - p.P0) <= 1e-9


def test_samples_header(tmp_path):
    path = tmp_path / "h.csv"
    cli.export_loop_samples(pauli_z_plan(), 3, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["dim", "4", "k", "2"]
    assert rows[1][:3] == ["t", "h_0_0_re", "h_0_0_im"]
    assert len(rows[1]) == 1 + 2 * 16
    assert len(rows) == 2 + 3


def test_samples_bit_exact(tmp_path):
    p = pauli_z_plan()
    path = tmp_path / "h.csv"
    cli.export_loop_samples(p, 101, path)
    t, h, _, _ = cli.read_loop_samples(path)
    assert t[50] == 0.5
    np.testing.assert_array_equal(h[50], loopsynth.hamiltonian_at(p, 0.5))
    np.testing.assert_array_equal(h, loopsynth.hamiltonian_at(p, np.linspace(0, 1, 101)))


def test_samples_grid_too_small(tmp_path):
    with pytest.raises(ValidationError):
        cli.export_loop_samples(pauli_z_plan(), 1, tmp_path / "h.csv")


def test_synth_writes_samples(tmp_path, capsys):
    path = tmp_path / "h.csv"
    code, _, _ = run_cli(capsys, "synth", "--gate", "cz", "--grid", "11", "--samples", str(path))
    assert code == 0
    t, h, dim, k = cli.read_loop_samples(path)
    assert (dim, k, len(t)) == (8, 4, 11)
