"""Command-line front end: evolve, compress, and verify workflows."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import _dense
from .circuit_ir import (
    Circuit,
    NativeCircuit,
    PairGate,
    QasmParseError,
    build_trotter_circuit,
    columnize,
    from_qasm,
    to_qasm,
    unitary_of,
)
from .compressor import (
    ResidualBudgetError,
    UnsupportedClassError,
    absorb_layer,
    compress,
    empty_block,
    pad_to_template,
)
from .propagators import (
    NativeGate,
    RGateParams,
    class_conjugation,
    conjugated_r_matrix,
    sequence_unitary,
    special_case_sequence,
)
from .simulator import (
    NoiseModel,
    ObservableSeries,
    basis_state,
    neel_state,
    run_dynamics,
    run_noisy,
    run_noisy_series,
    staggered_magnetization,
)
from .spin_model import CouplingParams, HamiltonianClass, TrotterPlan, classify
from .ybe import UnsolvedError

MODES = ("exact", "trotter", "compressed", "all")

RECOGNIZE_TOL = 1e-10


class ConfigError(ValueError):
    """Configuration or input problem; surfaced as a diagnostic with exit 2."""


@dataclass(frozen=True)
class JobConfig:
    """One evolution job: couplings, grid, initial state, optional noise."""

    j: CouplingParams
    spins: int
    t_final: float
    dt: float
    init: str = "neel"
    noise: NoiseModel | None = None
    mode: str = "all"


_CONFIG_KEYS = {"J", "class", "strength", "spins", "t_final", "dt", "init", "noise", "mode"}
_NOISE_KEYS = {"p1", "p2", "shots", "seed"}


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config field {field!r} must be a number, got {value!r}")
    return float(value)


def _integer(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"config field {field!r} must be an integer, got {value!r}")
    return value


def _parse_couplings(data: dict) -> CouplingParams:
    if "J" in data:
        j = data["J"]
        if not isinstance(j, dict):
            raise ConfigError("config field 'J' must be an object with x, y, z entries")
        unknown = set(j) - {"x", "y", "z"}
        if unknown:
            raise ConfigError(f"unknown axes in config field 'J': {', '.join(sorted(unknown))}")
        return CouplingParams(*(_number(j.get(axis, 0.0), f"J.{axis}") for axis in "xyz"))
    if "class" in data:
        name = data["class"]
        try:
            klass = HamiltonianClass(str(name).upper())
        except ValueError:
            raise ConfigError(f"config field 'class' must name a coupling family, got {name!r}") from None
        strength = _number(data.get("strength", 1.0), "strength")
        return CouplingParams(
            *(strength if axis in klass.axes else 0.0 for axis in "xyz")
        )
    raise ConfigError("config needs either 'J' or 'class'")


def load_config(path: Path) -> JobConfig:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    for field in ("spins", "t_final", "dt"):
        if field not in data:
            raise ConfigError(f"config field {field!r} is required")
    spins = _integer(data["spins"], "spins")
    j = _parse_couplings(data)
    t_final = _number(data["t_final"], "t_final")
    dt = _number(data["dt"], "dt")
    init = data.get("init", "neel")
    if not isinstance(init, str) or (init != "neel" and not init.startswith("basis:")):
        raise ConfigError("config field 'init' must be 'neel' or 'basis:<bitstring>'")
    if init.startswith("basis:"):
        bits = init[len("basis:") :]
        if len(bits) != spins or any(ch not in "01" for ch in bits):
            raise ConfigError(
                f"config field 'init' needs a basis bitstring of {spins} 0/1 characters"
            )
    noise = None
    if "noise" in data:
        nd = data["noise"]
        if not isinstance(nd, dict):
            raise ConfigError("config field 'noise' must be an object")
        bad = set(nd) - _NOISE_KEYS
        if bad:
            raise ConfigError(f"unknown noise field(s): {', '.join(sorted(bad))}")
        try:
            noise = NoiseModel(
                _number(nd.get("p1", 0.0), "noise.p1"),
                _number(nd.get("p2", 0.0), "noise.p2"),
                _integer(nd.get("shots", 8192), "noise.shots"),
                _integer(nd.get("seed", 0), "noise.seed"),
            )
        except ValueError as exc:
            raise ConfigError(f"config field 'noise': {exc}") from None
    mode = data.get("mode", "all")
    if mode not in MODES:
        raise ConfigError(f"config field 'mode' must be one of {MODES}, got {mode!r}")
    return JobConfig(j, spins, t_final, dt, init, noise, mode)


def _init_state(cfg: JobConfig):
    if cfg.init == "neel":
        return None
    return basis_state(cfg.spins, cfg.init[len("basis:") :])


# ---- QASM recognition of two-qubit propagator blocks ----

def _build_templates():
    patterns = {
        HamiltonianClass.X: [(0.37, 0.0), (0.0, 0.0)],
        HamiltonianClass.Y: [(0.37, 0.0), (0.0, 0.0)],
        HamiltonianClass.Z: [(0.0, 0.23), (0.0, 0.0)],
        HamiltonianClass.XY: [(0.37, 0.23), (0.37, 0.0), (0.0, 0.23), (0.0, 0.0)],
        HamiltonianClass.XZ: [(0.37, 0.23), (0.37, 0.0), (0.0, 0.23), (0.0, 0.0)],
        HamiltonianClass.YZ: [(0.37, 0.23), (0.37, 0.0), (0.0, 0.23), (0.0, 0.0)],
    }
    entries = {}
    for klass, pats in patterns.items():
        tag = class_conjugation(klass)
        for g0, d0 in pats:
            seq = special_case_sequence(klass, RGateParams(g0, d0))
            kinds = tuple(g.kind for g in seq)
            if kinds in entries:
                continue
            gi = di = None
            for i, g in enumerate(seq):
                if g.kind == "rx" and abs(g.angle - (-2.0 * g0)) < 1e-9:
                    gi = i
                if g.kind == "rz" and abs(g.angle - (-2.0 * d0)) < 1e-9:
                    di = i
            entries[kinds] = (tag, gi, di)
    return sorted(
        ((kinds, *meta) for kinds, meta in entries.items()),
        key=lambda e: (-len(e[0]), e[0]),
    )


_TEMPLATES = _build_templates()


def recognize_pair_circuit(native: NativeCircuit) -> Circuit:
    """Group native gates back into two-qubit propagator gates.

    Greedy longest-first matching of the emitter's per-gate native blocks;
    every match is verified against the dense gate matrix before acceptance.
    """
    gates = native.gates
    out: list[PairGate] = []
    pos = 0
    while pos < len(gates):
        matched = None
        for kinds, tag, gi, di in _TEMPLATES:
            end = pos + len(kinds)
            if end > len(gates):
                continue
            window = gates[pos:end]
            if tuple(g.kind for g in window) != kinds:
                continue
            qubits = {q for g in window for q in g.qubits}
            if len(qubits) != 2 or max(qubits) - min(qubits) != 1:
                continue
            base = min(qubits)
            local = tuple(
                NativeGate(g.kind, tuple(q - base for q in g.qubits), g.angle)
                for g in window
            )
            gamma = -0.5 * window[gi].angle if gi is not None else 0.0
            delta = -0.5 * window[di].angle if di is not None else 0.0
            params = RGateParams(gamma, delta)
            target = conjugated_r_matrix(params, tag)
            if _dense.phase_distance(sequence_unitary(local), target) < RECOGNIZE_TOL:
                matched = PairGate(base, params, tag)
                pos = end
                break
        if matched is None:
            raise ConfigError(
                f"unrecognized gate structure at native gate {pos}; expected "
                "the per-gate blocks produced by the QASM emitter"
            )
        out.append(matched)
    return columnize(Circuit(native.num_qubits, tuple(out)))


# ---- commands ----

def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _suffixed(out: Path, tag: str) -> Path:
    return out.with_name(f"{out.stem}.{tag}{out.suffix}")


def _noisy_rows(cfg: JobConfig, plan: TrotterPlan, mode: str, noise: NoiseModel, init):
    step = build_trotter_circuit(cfg.spins, cfg.j, TrotterPlan(plan.dt, plan.dt))
    if mode == "trotter":
        return run_noisy_series(step, plan.num_steps, noise, init_state=init)
    init_vec = neel_state(cfg.spins) if init is None else init
    block = empty_block(cfg.spins, classify(cfg.j))
    rows = [(staggered_magnetization(init_vec), 0.0)]
    for _ in range(plan.num_steps):
        block = absorb_layer(block, list(step.gates))
        rows.append(run_noisy(pad_to_template(block).circuit, noise, init_state=init))
    return rows


def _rows_to_csv(rows, plan: TrotterPlan) -> str:
    times = plan.times()
    series = ObservableSeries(
        tuple((k, times[k], rows[k][0]) for k in range(len(rows)))
    )
    return series.to_csv()


def _cmd_evolve(args) -> int:
    cfg = load_config(Path(args.config))
    mode = args.mode or cfg.mode
    noise = cfg.noise
    if args.seed is not None and noise is not None:
        noise = NoiseModel(noise.p1, noise.p2, noise.shots, args.seed)
    plan = TrotterPlan(cfg.t_final, cfg.dt)
    init = _init_state(cfg)
    modes = ("exact", "trotter", "compressed") if mode == "all" else (mode,)
    if mode == "all" and args.out is None:
        raise ConfigError("--out is required with mode=all")
    series = {m: run_dynamics(cfg.spins, cfg.j, plan, m, init_state=init) for m in modes}
    if mode == "all":
        out = Path(args.out)
        for m in modes:
            _write(_suffixed(out, m), series[m].to_csv())
    elif args.out is None:
        sys.stdout.write(series[mode].to_csv())
    else:
        _write(Path(args.out), series[mode].to_csv())
    if noise is not None and mode in ("trotter", "compressed"):
        if args.out is None:
            raise ConfigError("--out is required for the noisy companion series")
        rows = _noisy_rows(cfg, plan, mode, noise, init)
        _write(_suffixed(Path(args.out), "noisy"), _rows_to_csv(rows, plan))
    if args.qasm_out is not None:
        if mode == "trotter":
            circ = build_trotter_circuit(cfg.spins, cfg.j, plan)
        elif mode == "compressed":
            circ = compress(build_trotter_circuit(cfg.spins, cfg.j, plan)).circuit
        else:
            raise ConfigError("--qasm-out needs mode trotter or compressed")
        _write(Path(args.qasm_out), to_qasm(circ))
    return 0


def _cmd_compress(args) -> int:
    if (args.qasm_in is None) == (args.config is None):
        raise ConfigError("compress needs exactly one input: a QASM path or --config")
    if args.qasm_in is not None:
        native = from_qasm(Path(args.qasm_in).read_text(encoding="utf-8"))
        circuit = recognize_pair_circuit(native)
    else:
        cfg = load_config(Path(args.config))
        circuit = build_trotter_circuit(
            cfg.spins, cfg.j, TrotterPlan(cfg.t_final, cfg.dt)
        )
    block = compress(circuit)
    _write(Path(args.qasm_out), to_qasm(block.circuit))
    stats = {
        "gates_before": len(circuit.gates),
        "gates_after": block.gate_count,
        "layers": block.alternating_layers,
        "residual": block.residual,
        "ybe_moves": block.ybe_moves,
    }
    print(json.dumps(stats, sort_keys=True))
    return 0


def _cmd_verify(args) -> int:
    a = from_qasm(Path(args.circuit_a).read_text(encoding="utf-8"))
    b = from_qasm(Path(args.circuit_b).read_text(encoding="utf-8"))
    if a.num_qubits != b.num_qubits:
        raise ConfigError(
            f"qubit counts differ: {a.num_qubits} vs {b.num_qubits}"
        )
    dist = _dense.phase_distance(unitary_of(a), unitary_of(b))
    ok = dist < args.tol
    print(f"distance {dist:.17g}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinchain",
        description="Spin-chain dynamics: Trotter circuits, fixed-depth "
        "compression, and dense verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ev = sub.add_parser("evolve", help="run dynamics and write m_s series CSV")
    p_ev.add_argument("--config", required=True, help="JSON job description")
    p_ev.add_argument("--mode", choices=MODES, help="engine (default from config, else all)")
    p_ev.add_argument("--out", help="CSV output path (mode=all writes suffixed files)")
    p_ev.add_argument("--qasm-out", help="also write the run's circuit as QASM")
    p_ev.add_argument("--seed", type=int, help="override the noise seed")

    p_co = sub.add_parser("compress", help="compress a circuit to fixed depth")
    p_co.add_argument("qasm_in", nargs="?", help="input circuit in the QASM subset")
    p_co.add_argument("--config", help="build the input circuit from a job config")
    p_co.add_argument("--qasm-out", required=True, help="compressed QASM output path")

    p_ve = sub.add_parser("verify", help="compare two QASM circuits up to global phase")
    p_ve.add_argument("circuit_a")
    p_ve.add_argument("circuit_b")
    p_ve.add_argument("--tol", type=float, default=1e-7, help="pass threshold (default 1e-7)")

    args = parser.parse_args(argv)
    try:
        if args.command == "evolve":
            return _cmd_evolve(args)
        if args.command == "compress":
            return _cmd_compress(args)
        return _cmd_verify(args)
    except (
        ConfigError,
        QasmParseError,
        UnsolvedError,
        UnsupportedClassError,
        ResidualBudgetError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
