"""Circuit IR: adjacent-pair gates on a chain, columns, dense oracle, QASM I/O."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import _dense
from .propagators import (
    Angles3,
    GateSequence,
    NativeGate,
    RGateParams,
    class_conjugation,
    conjugated_r_matrix,
    decompose_xyz,
    from_angles3,
    native_gate_matrix,
    special_case_sequence,
    xyz_propagator,
)
from .spin_model import CouplingParams, HamiltonianClass, TrotterPlan, classify, step_angles

MAX_DENSE_QUBITS = 12


@dataclass(frozen=True)
class PairGate:
    """A two-qubit gate on the adjacent pair (pair, pair + 1).

    params is either an Angles3 (general two-spin propagator) or an
    RGateParams (the two-parameter class), optionally conjugated by the
    class conjugator u1 or u2.
    """

    pair: int
    params: Angles3 | RGateParams
    conjugation: str = "none"

    def __post_init__(self) -> None:
        if self.pair < 0:
            raise ValueError(f"pair index must be nonnegative, got {self.pair}")
        if not isinstance(self.params, (Angles3, RGateParams)):
            raise TypeError(f"params must be Angles3 or RGateParams, got {type(self.params)!r}")
        if self.conjugation not in ("none", "u1", "u2"):
            raise ValueError(f"unknown conjugation {self.conjugation!r}")
        if isinstance(self.params, Angles3) and self.conjugation != "none":
            raise ValueError("conjugation tags apply to RGateParams gates only")

    def unitary(self) -> np.ndarray:
        if isinstance(self.params, Angles3):
            return xyz_propagator(self.params)
        return conjugated_r_matrix(self.params, self.conjugation)


@dataclass(frozen=True)
class Circuit:
    """Ordered adjacent-pair gates on num_qubits chain sites.

    columns, when present, is a left-packed partition of gate indices such
    that no two gates in a column share a qubit.
    """

    num_qubits: int
    gates: tuple[PairGate, ...]
    columns: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.num_qubits < 2:
            raise ValueError(f"need at least 2 qubits, got {self.num_qubits}")
        for g in self.gates:
            if g.pair > self.num_qubits - 2:
                raise ValueError(
                    f"pair {g.pair} out of range for {self.num_qubits} qubits"
                )
        if self.columns is not None:
            flat = [i for col in self.columns for i in col]
            if sorted(flat) != list(range(len(self.gates))):
                raise ValueError("columns must partition the gate list")
            for col in self.columns:
                pairs = [self.gates[i].pair for i in col]
                touched = [q for p in pairs for q in (p, p + 1)]
                if len(set(touched)) != len(touched):
                    raise ValueError(f"column {col!r} has overlapping gates")

    @property
    def is_alternating(self) -> bool:
        """True when columns alternate between even-pair and odd-pair families."""
        if self.columns is None:
            return False
        parities = [
            {self.gates[i].pair % 2 for i in col} for col in self.columns if col
        ]
        if any(len(par) != 1 for par in parities):
            return False
        flat = [next(iter(par)) for par in parities]
        return all(a != b for a, b in zip(flat, flat[1:]))

    def column_gates(self) -> list[list[PairGate]]:
        if self.columns is None:
            raise ValueError("circuit has no column structure; call columnize")
        return [[self.gates[i] for i in col] for col in self.columns]


@dataclass(frozen=True)
class NativeCircuit:
    """A circuit over the native gate set with register-level qubit indices."""

    num_qubits: int
    gates: tuple[NativeGate, ...]

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError("need at least 1 qubit")
        for g in self.gates:
            if any(q < 0 or q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {g!r} out of range for {self.num_qubits} qubits")
            if g.kind == "cx" and abs(g.qubits[0] - g.qubits[1]) != 1:
                raise ValueError(f"cx must act on adjacent qubits, got {g.qubits!r}")


def build_trotter_circuit(n: int, j: CouplingParams, plan: TrotterPlan) -> Circuit:
    """num_steps repetitions of an even-pair column then an odd-pair column.

    Every gate carries the same step angles theta = J * dt. Gate count per
    step is n - 1; for n = 2 each step is a single one-gate column.
    """
    if n < 2:
        raise ValueError(f"need at least 2 qubits, got {n}")
    angles = step_angles(j, plan.dt)
    gates: list[PairGate] = []
    columns: list[tuple[int, ...]] = []
    for _ in range(plan.num_steps):
        for parity in (0, 1):
            col = []
            for pair in range(parity, n - 1, 2):
                col.append(len(gates))
                gates.append(PairGate(pair, angles))
            if col:
                columns.append(tuple(col))
    return Circuit(n, tuple(gates), tuple(columns))


def columnize(c: Circuit) -> Circuit:
    """Left-packed greedy columns; a stable canonical view of the gate order."""
    frontier = [0] * c.num_qubits
    columns: dict[int, list[int]] = {}
    for idx, g in enumerate(c.gates):
        depth = max(frontier[g.pair], frontier[g.pair + 1])
        columns.setdefault(depth, []).append(idx)
        frontier[g.pair] = frontier[g.pair + 1] = depth + 1
    packed = tuple(tuple(columns[d]) for d in sorted(columns))
    return Circuit(c.num_qubits, c.gates, packed)


def unitary_of(c: Circuit | NativeCircuit) -> np.ndarray:
    """Dense 2^N x 2^N unitary of the circuit, gates applied in order."""
    n = c.num_qubits
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense oracle limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    u = np.eye(2 ** n, dtype=complex)
    for g in c.gates:
        if isinstance(g, PairGate):
            u = _dense.apply_gate(u, g.unitary(), (g.pair, g.pair + 1), n)
        else:
            u = _dense.apply_gate(u, native_gate_matrix(g), g.qubits, n)
    return u


def _pair_gate_native(g: PairGate) -> GateSequence:
    if isinstance(g.params, RGateParams):
        klass = _class_of_r_gate(g.params, g.conjugation)
        return special_case_sequence(klass, g.params)
    params, _conj, ok = from_angles3(g.params)
    if ok:
        klass = classify(CouplingParams(*g.params.as_tuple()))
        return special_case_sequence(klass, params)
    return decompose_xyz(g.params)


def _class_of_r_gate(p: RGateParams, conjugation: str) -> HamiltonianClass:
    # invert the from_angles3 tagging; zero thresholds match special_case guards
    has_g = abs(p.gamma) > 1e-9
    has_d = abs(p.delta) > 1e-9
    if conjugation == "u2":
        return HamiltonianClass.XY
    if conjugation == "u1":
        return HamiltonianClass.YZ if has_d else HamiltonianClass.Y
    if has_g and has_d:
        return HamiltonianClass.XZ
    if has_d:
        return HamiltonianClass.Z
    return HamiltonianClass.X


def to_native(c: Circuit) -> NativeCircuit:
    """Expand pair gates into native gates via the class circuits (or 3-CX form)."""
    gates: list[NativeGate] = []
    for g in c.gates:
        for ng in _pair_gate_native(g):
            gates.append(
                NativeGate(ng.kind, tuple(q + g.pair for q in ng.qubits), ng.angle)
            )
    return NativeCircuit(c.num_qubits, tuple(gates))


QASM_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def to_qasm(c: Circuit | NativeCircuit) -> str:
    """Serialize to the OpenQASM 2.0 subset {rx, rz, h, s, cx}."""
    native = to_native(c) if isinstance(c, Circuit) else c
    lines = [QASM_HEADER + f"qreg q[{native.num_qubits}];"]
    for g in native.gates:
        if g.kind == "cx":
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        elif g.kind in ("rx", "rz"):
            lines.append(f"{g.kind}({g.angle:.17g}) q[{g.qubits[0]}];")
        else:
            lines.append(f"{g.kind} q[{g.qubits[0]}];")
    return "\n".join(lines) + "\n"


class QasmParseError(ValueError):
    """Parse failure with 1-based line and column position."""

    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_QASM_STATEMENT = re.compile(
    r"""(?P<kind>[a-zA-Z_][a-zA-Z_0-9]*)\s*
        (?:\(\s*(?P<angle>[^)]*)\s*\))?\s*
        (?P<args>[^;]*)""",
    re.VERBOSE,
)
_QASM_ARG = re.compile(r"^(?P<reg>[a-zA-Z_][a-zA-Z_0-9]*)\[(?P<idx>\d+)\]$")
_FLOAT = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_angle(text: str, line: int, col: int) -> float:
    t = text.strip()
    neg = False
    if t.startswith("-"):
        neg, t = True, t[1:].strip()
    if t == "pi":
        value = math.pi
    elif _FLOAT.match(t):
        value = float(t)
    else:
        raise QasmParseError(line, col, f"bad angle expression {text.strip()!r}")
    return -value if neg else value


def from_qasm(text: str) -> NativeCircuit:
    """Parse the QASM subset back to a native circuit.

    The gate set is {rx, rz, h, s, cx}; anything else is rejected with the
    offending line and column.
    """
    num_qubits: int | None = None
    reg_name: str | None = None
    gates: list[NativeGate] = []
    saw_version = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("//", 1)[0]
        if not code.strip():
            continue
        pos = 0
        for stmt in code.split(";")[:-1] if code.rstrip().endswith(";") else _unterminated(code, lineno):
            col = pos + len(stmt) - len(stmt.lstrip()) + 1
            pos += len(stmt) + 1
            s = stmt.strip()
            if not s:
                continue
            if s.startswith("OPENQASM"):
                if s.split()[1:] != ["2.0"]:
                    raise QasmParseError(lineno, col, f"unsupported version in {s!r}")
                saw_version = True
                continue
            if s.startswith("include"):
                continue
            if s.startswith("qreg"):
                m = _QASM_ARG.match(s[4:].strip())
                if not m:
                    raise QasmParseError(lineno, col, f"bad qreg declaration {s!r}")
                if num_qubits is not None:
                    raise QasmParseError(lineno, col, "multiple qreg declarations")
                reg_name = m.group("reg")
                num_qubits = int(m.group("idx"))
                continue
            m = _QASM_STATEMENT.match(s)
            if not m:
                raise QasmParseError(lineno, col, f"unparseable statement {s!r}")
            kind = m.group("kind")
            if kind in ("creg", "measure", "barrier", "reset", "gate", "if"):
                raise QasmParseError(lineno, col, f"{kind!r} is outside the supported subset")
            if kind not in ("rx", "rz", "h", "s", "cx"):
                raise QasmParseError(lineno, col, f"unknown gate {kind!r}")
            if num_qubits is None:
                raise QasmParseError(lineno, col, "gate before qreg declaration")
            qubits = []
            for arg in filter(None, (a.strip() for a in m.group("args").split(","))):
                am = _QASM_ARG.match(arg)
                if not am or am.group("reg") != reg_name:
                    raise QasmParseError(lineno, col, f"bad operand {arg!r}")
                idx = int(am.group("idx"))
                if idx >= num_qubits:
                    raise QasmParseError(lineno, col, f"qubit {idx} out of range")
                qubits.append(idx)
            angle_text = m.group("angle")
            angle = None
            if kind in ("rx", "rz"):
                if angle_text is None:
                    raise QasmParseError(lineno, col, f"{kind} needs an angle")
                angle = _parse_angle(angle_text, lineno, col)
            elif angle_text is not None:
                raise QasmParseError(lineno, col, f"{kind} takes no angle")
            expected = 2 if kind == "cx" else 1
            if len(qubits) != expected:
                raise QasmParseError(
                    lineno, col, f"{kind} expects {expected} operand(s), got {len(qubits)}"
                )
            try:
                gates.append(NativeGate(kind, tuple(qubits), angle))
            except ValueError as exc:
                raise QasmParseError(lineno, col, str(exc)) from exc

    if not saw_version:
        raise QasmParseError(1, 1, "missing OPENQASM 2.0 header")
    if num_qubits is None:
        raise QasmParseError(1, 1, "missing qreg declaration")
    try:
        return NativeCircuit(num_qubits, tuple(gates))
    except ValueError as exc:
        raise QasmParseError(1, 1, str(exc)) from exc


def _unterminated(code: str, lineno: int):
    raise QasmParseError(lineno, len(code.rstrip()), "statement not terminated by ';'")
