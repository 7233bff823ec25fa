"""Command-line workflows: evolve, compress, verify, and diagnostics."""

import json

import numpy as np
import pytest

from spinchain._dense import phase_distance
from spinchain.circuit_ir import build_trotter_circuit, from_qasm, to_native, to_qasm, unitary_of
from spinchain.cli import ConfigError, JobConfig, load_config, main, recognize_pair_circuit
from spinchain.spin_model import CouplingParams, TrotterPlan

BASE_CONFIG = {
    "J": {"x": -0.8, "y": -0.2, "z": 0.0},
    "spins": 3,
    "t_final": 0.5,
    "dt": 0.025,
    "init": "neel",
}


def write_config(tmp_path, name="job.json", **overrides):
    data = dict(BASE_CONFIG)
    data.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_load_config_round_trip(tmp_path):
    cfg = load_config(write_config(tmp_path))
    assert isinstance(cfg, JobConfig)
    assert cfg.j == CouplingParams(-0.8, -0.2, 0.0)
    assert cfg.spins == 3
    assert cfg.noise is None
    assert cfg.mode == "all"


def test_load_config_class_form(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(
        json.dumps({"class": "xz", "strength": 0.5, "spins": 4, "t_final": 1.0, "dt": 0.1}),
        encoding="utf-8",
    )
    cfg = load_config(path)
    assert cfg.j == CouplingParams(0.5, 0.0, 0.5)


def test_load_config_diagnostics(tmp_path):
    bad = [
        ({"spins": 3}, "t_final"),
        ({**BASE_CONFIG, "extra": 1}, "extra"),
        ({**BASE_CONFIG, "J": {"x": 1, "w": 2}}, "w"),
        ({**BASE_CONFIG, "J": {"x": "one"}}, "J.x"),
        ({**BASE_CONFIG, "spins": 3.5}, "spins"),
        ({**BASE_CONFIG, "init": "updown"}, "init"),
        ({**BASE_CONFIG, "init": "basis:01"}, "init"),
        ({**BASE_CONFIG, "noise": {"p1": 2.0}}, "noise"),
        ({**BASE_CONFIG, "noise": {"chance": 0.1}}, "chance"),
        ({**BASE_CONFIG, "mode": "warp"}, "mode"),
    ]
    for data, needle in bad:
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert needle in str(err.value)


def test_evolve_single_mode_writes_csv(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "series.csv"
    assert main(["evolve", "--config", str(cfg), "--mode", "exact", "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "step,time,m_s"
    assert len(lines) == 22  # header + 21 grid points
    assert lines[1].startswith("0,0,1")


def test_evolve_stdout_when_no_out(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["evolve", "--config", str(cfg), "--mode", "exact"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("step,time,m_s\n")


def test_evolve_all_writes_three_files(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run.csv"
    assert main(["evolve", "--config", str(cfg), "--out", str(out)]) == 0
    for mode in ("exact", "trotter", "compressed"):
        assert (tmp_path / f"run.{mode}.csv").exists()
    # trotter and compressed series agree closely at this depth
    t = (tmp_path / "run.trotter.csv").read_text(encoding="utf-8")
    c = (tmp_path / "run.compressed.csv").read_text(encoding="utf-8")
    tv = [float(line.split(",")[2]) for line in t.splitlines()[1:]]
    cv = [float(line.split(",")[2]) for line in c.splitlines()[1:]]
    assert max(abs(a - b) for a, b in zip(tv, cv)) < 1e-7


def test_evolve_all_requires_out(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["evolve", "--config", str(cfg)]) == 2
    assert "error:" in capsys.readouterr().err


def test_evolve_outputs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    main(["evolve", "--config", str(cfg), "--mode", "compressed", "--out", str(a)])
    main(["evolve", "--config", str(cfg), "--mode", "compressed", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_evolve_noisy_companion_series(tmp_path):
    cfg = write_config(
        tmp_path, noise={"p1": 0.0, "p2": 0.01, "shots": 32, "seed": 7}
    )
    out = tmp_path / "noisy_run.csv"
    assert main(["evolve", "--config", str(cfg), "--mode", "trotter", "--out", str(out)]) == 0
    noisy = tmp_path / "noisy_run.noisy.csv"
    assert noisy.exists()
    lines = noisy.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "step,time,m_s"
    assert len(lines) == 22
    assert lines[1].startswith("0,0,1")


def test_evolve_seed_override_changes_noisy_series(tmp_path):
    cfg = write_config(tmp_path, noise={"p1": 0.0, "p2": 0.05, "shots": 16, "seed": 7})
    out_a = tmp_path / "s7.csv"
    out_b = tmp_path / "s8.csv"
    main(["evolve", "--config", str(cfg), "--mode", "trotter", "--out", str(out_a)])
    main(
        [
            "evolve",
            "--config",
            str(cfg),
            "--mode",
            "trotter",
            "--out",
            str(out_b),
            "--seed",
            "8",
        ]
    )
    ideal_a = (tmp_path / "s7.csv").read_bytes()
    ideal_b = (tmp_path / "s8.csv").read_bytes()
    assert ideal_a == ideal_b  # the ideal series ignores the seed
    noisy_a = (tmp_path / "s7.noisy.csv").read_bytes()
    noisy_b = (tmp_path / "s8.noisy.csv").read_bytes()
    assert noisy_a != noisy_b


def test_evolve_qasm_out_modes(tmp_path):
    cfg = write_config(tmp_path)
    qasm = tmp_path / "circuit.qasm"
    assert (
        main(
            [
                "evolve",
                "--config",
                str(cfg),
                "--mode",
                "compressed",
                "--out",
                str(tmp_path / "x.csv"),
                "--qasm-out",
                str(qasm),
            ]
        )
        == 0
    )
    native = from_qasm(qasm.read_text(encoding="utf-8"))
    assert native.num_qubits == 3
    # exact mode has no circuit to emit
    code = main(
        [
            "evolve",
            "--config",
            str(cfg),
            "--mode",
            "exact",
            "--out",
            str(tmp_path / "y.csv"),
            "--qasm-out",
            str(tmp_path / "z.qasm"),
        ]
    )
    assert code == 2


def test_compress_from_config_stats(tmp_path, capsys):
    cfg = write_config(tmp_path)
    qasm_out = tmp_path / "compressed.qasm"
    assert main(["compress", "--config", str(cfg), "--qasm-out", str(qasm_out)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert set(stats) == {"gates_before", "gates_after", "layers", "residual", "ybe_moves"}
    assert stats["gates_before"] == 40  # 20 steps x 2 gates
    assert stats["gates_after"] <= 3
    assert stats["residual"] < 1e-9
    assert qasm_out.exists()


def test_compress_from_qasm_round_trip(tmp_path, capsys):
    j = CouplingParams(-0.8, -0.2, 0.0)
    circuit = build_trotter_circuit(3, j, TrotterPlan(0.25, 0.025))
    qasm_in = tmp_path / "deep.qasm"
    qasm_in.write_text(to_qasm(circuit), encoding="utf-8")
    qasm_out = tmp_path / "shallow.qasm"
    assert main(["compress", str(qasm_in), "--qasm-out", str(qasm_out)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["gates_before"] == len(circuit.gates)
    shallow = from_qasm(qasm_out.read_text(encoding="utf-8"))
    assert phase_distance(unitary_of(shallow), unitary_of(circuit)) < 1e-7


def test_compress_requires_exactly_one_input(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["compress", "--qasm-out", str(tmp_path / "o.qasm")]) == 2
    assert (
        main(
            [
                "compress",
                "x.qasm",
                "--config",
                str(cfg),
                "--qasm-out",
                str(tmp_path / "o.qasm"),
            ]
        )
        == 2
    )


def test_recognize_pair_circuit_matches_source():
    rng = np.random.default_rng(31)
    for jraw in ((0.7, 0.0, 0.0), (0.0, 0.4, 0.0), (0.0, 0.0, 0.9), (0.5, -0.3, 0.0), (0.5, 0.0, -0.3), (0.0, 0.5, -0.3)):
        j = CouplingParams(*jraw)
        c = build_trotter_circuit(int(rng.integers(2, 5)), j, TrotterPlan(0.1, 0.05))
        native = to_native(c)
        rebuilt = recognize_pair_circuit(native)
        assert phase_distance(unitary_of(rebuilt), unitary_of(c)) < 1e-10


def test_verify_pass_and_fail(tmp_path, capsys):
    j = CouplingParams(-0.8, -0.2, 0.0)
    a = build_trotter_circuit(3, j, TrotterPlan(0.1, 0.05))
    b = build_trotter_circuit(3, j, TrotterPlan(0.1, 0.025))
    pa = tmp_path / "a.qasm"
    pb = tmp_path / "b.qasm"
    pc = tmp_path / "c.qasm"
    pa.write_text(to_qasm(a), encoding="utf-8")
    pb.write_text(to_qasm(a), encoding="utf-8")
    pc.write_text(to_qasm(b), encoding="utf-8")
    assert main(["verify", str(pa), str(pb)]) == 0
    out = capsys.readouterr().out
    assert "distance" in out and "PASS" in out
    assert main(["verify", str(pa), str(pc)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_tolerance_flag(tmp_path):
    j = CouplingParams(0.3, 0.0, 0.0)
    a = build_trotter_circuit(2, j, TrotterPlan(0.1, 0.1))
    b = build_trotter_circuit(2, CouplingParams(0.3 + 1e-9, 0.0, 0.0), TrotterPlan(0.1, 0.1))
    pa = tmp_path / "a.qasm"
    pb = tmp_path / "b.qasm"
    pa.write_text(to_qasm(a), encoding="utf-8")
    pb.write_text(to_qasm(b), encoding="utf-8")
    assert main(["verify", str(pa), str(pb), "--tol", "1e-6"]) == 0
    assert main(["verify", str(pa), str(pb), "--tol", "1e-14"]) == 1


def test_errors_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["evolve", "--config", str(missing)]) == 2
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.qasm"
    bad.write_text("OPENQASM 2.0;\nqreg q[2];\nfancy q[0];\n", encoding="utf-8")
    assert main(["verify", str(bad), str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["transmogrify"])
    assert err.value.code == 2
