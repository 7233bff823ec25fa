"""Two-spin propagators and their native-gate circuit decompositions.

Matrix conventions used throughout: basis order |00>, |01>, |10>, |11> with
qubit 0 the left tensor factor; RX(t) = exp(-i t X / 2), RZ(t) = exp(-i t Z / 2),
S = diag(1, i), H the standard Hadamard, CX controlled on qubit 0. Circuit
equality against a target matrix is up to global phase unless stated
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spin_model import Angles3, CouplingParams, HamiltonianClass, classify

_SQRT1_2 = 1.0 / math.sqrt(2.0)

GATE_KINDS = ("rx", "rz", "h", "s", "cx")

CONJUGATION_TAGS = ("none", "u1", "u2")


@dataclass(frozen=True)
class RGateParams:
    """Parameters of the two-qubit propagator R(gamma, delta).

    gamma is the XX-type rotation, delta the ZZ-type phase.
    """

    gamma: float
    delta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and math.isfinite(self.delta)):
            raise ValueError(f"R params must be finite, got ({self.gamma!r}, {self.delta!r})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.gamma, self.delta)


@dataclass(frozen=True)
class NativeGate:
    """One gate from the native set {rx, rz, h, s, cx}.

    qubits are register indices; rotations carry an angle, cx carries
    (control, target).
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cx":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"cx needs two distinct qubits, got {self.qubits!r}")
            if self.angle is not None:
                raise ValueError("cx carries no angle")
        else:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on one qubit, got {self.qubits!r}")
            if self.kind in ("rx", "rz"):
                if self.angle is None or not math.isfinite(self.angle):
                    raise ValueError(f"{self.kind} needs a finite angle, got {self.angle!r}")
            elif self.angle is not None:
                raise ValueError(f"{self.kind} carries no angle")


GateSequence = tuple[NativeGate, ...]


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]], dtype=complex
    )


H_MATRIX = np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
S_MATRIX = np.array([[1.0, 0.0], [0.0, 1j]], dtype=complex)
# control = qubit 0 (left factor)
CX_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
# control = qubit 1
CX_REVERSED_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)


def native_gate_matrix(gate: NativeGate) -> np.ndarray:
    """The gate's unitary on its own qubits (2x2, or 4x4 for cx in qubit order)."""
    if gate.kind == "rx":
        return rx_matrix(gate.angle)
    if gate.kind == "rz":
        return rz_matrix(gate.angle)
    if gate.kind == "h":
        return H_MATRIX
    if gate.kind == "s":
        return S_MATRIX
    return CX_MATRIX


def pauli_pair_exponential(axis: str, theta: float) -> np.ndarray:
    """exp(i theta sigma_axis x sigma_axis) on two qubits, in closed form."""
    c = math.cos(theta)
    s = 1j * math.sin(theta)
    if axis == "x":
        return np.array(
            [[c, 0, 0, s], [0, c, s, 0], [0, s, c, 0], [s, 0, 0, c]], dtype=complex
        )
    if axis == "y":
        return np.array(
            [[c, 0, 0, -s], [0, c, s, 0], [0, s, c, 0], [-s, 0, 0, c]], dtype=complex
        )
    if axis == "z":
        e_plus, e_minus = np.exp(1j * theta), np.exp(-1j * theta)
        return np.diag([e_plus, e_minus, e_minus, e_plus]).astype(complex)
    raise ValueError(f"axis must be one of x, y, z, got {axis!r}")


def xyz_propagator(a: Angles3) -> np.ndarray:
    """exp(i (tx XX + ty YY + tz ZZ)) in closed form.

    Block structure: on span(|00>, |11>) the matrix is
    e^{i tz} (cos g, i sin g) with g = tx - ty, and on span(|01>, |10>)
    it is e^{-i tz} (cos d, i sin d) with d = tx + ty.
    """
    tx, ty, tz = a.as_tuple()
    g = tx - ty
    d = tx + ty
    outer = np.exp(1j * tz)
    inner = np.exp(-1j * tz)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = u[3, 3] = outer * math.cos(g)
    u[0, 3] = u[3, 0] = outer * 1j * math.sin(g)
    u[1, 1] = u[2, 2] = inner * math.cos(d)
    u[1, 2] = u[2, 1] = inner * 1j * math.sin(d)
    return u


def r_matrix(p: RGateParams) -> np.ndarray:
    """The two-parameter propagator R(gamma, delta) = exp(i(gamma XX + delta ZZ))."""
    return xyz_propagator(Angles3(p.gamma, 0.0, p.delta))


U1_MATRIX = np.kron(rz_matrix(math.pi / 2), rz_matrix(math.pi / 2))
U2_MATRIX = np.kron(rx_matrix(math.pi / 2), rx_matrix(math.pi / 2))

_CONJ_MATRIX = {
    "none": np.eye(4, dtype=complex),
    "u1": U1_MATRIX,
    "u2": U2_MATRIX,
}


def conjugation_matrix(tag: str) -> np.ndarray:
    if tag not in _CONJ_MATRIX:
        raise ValueError(f"unknown conjugation tag {tag!r}")
    return _CONJ_MATRIX[tag]


def conjugated_r_matrix(p: RGateParams, tag: str) -> np.ndarray:
    """U R(gamma, delta) U^dag for the class conjugator U."""
    u = conjugation_matrix(tag)
    return u @ r_matrix(p) @ u.conj().T


def from_angles3(a: Angles3) -> tuple[RGateParams, str, bool]:
    """Map a step-angle triple onto the R(gamma, delta) class of its Hamiltonian.

    Returns (params, conjugation_tag, ok). The mapping satisfies
    xyz_propagator(a) = U R(gamma, delta) U^dag exactly, with U the returned
    conjugator:

      X:  (tx, 0)  none        Y:  (ty, 0)  u1        Z:  (0, tz)  none
      XY: (tx, ty) u2          XZ: (tx, tz) none      YZ: (ty, tz) u1

    The full XYZ class is outside the two-parameter family: ok is False and
    the params are zeros.
    """
    tx, ty, tz = a.as_tuple()
    klass = classify(CouplingParams(tx, ty, tz))
    if klass is HamiltonianClass.X:
        return RGateParams(tx, 0.0), "none", True
    if klass is HamiltonianClass.Y:
        return RGateParams(ty, 0.0), "u1", True
    if klass is HamiltonianClass.Z:
        return RGateParams(0.0, tz), "none", True
    if klass is HamiltonianClass.XY:
        return RGateParams(tx, ty), "u2", True
    if klass is HamiltonianClass.XZ:
        return RGateParams(tx, tz), "none", True
    if klass is HamiltonianClass.YZ:
        return RGateParams(ty, tz), "u1", True
    return RGateParams(0.0, 0.0), "none", False


def decompose_xyz(a: Angles3) -> GateSequence:
    """Three-CX native circuit for the general two-spin propagator.

    Matches xyz_propagator(a) up to a global phase for every angle triple;
    the gate count is constant (3 CX plus 8 single-qubit gates).
    """
    tx, ty, tz = a.as_tuple()
    return (
        NativeGate("cx", (0, 1)),
        NativeGate("rx", (0,), -2.0 * tx),
        NativeGate("rz", (1,), -2.0 * tz),
        NativeGate("h", (0,)),
        NativeGate("cx", (0, 1)),
        NativeGate("s", (0,)),
        NativeGate("rz", (1,), 2.0 * ty),
        NativeGate("h", (0,)),
        NativeGate("cx", (0, 1)),
        NativeGate("rx", (0,), -math.pi / 2),
        NativeGate("rx", (1,), math.pi / 2),
    )


def _xz_core(gamma: float, delta: float) -> list[NativeGate]:
    # two-CX core: CX (rx(-2g) x rz(-2d)) CX = exp(i(g XX + d ZZ)) exactly
    gates: list[NativeGate] = [NativeGate("cx", (0, 1))]
    if gamma != 0.0:
        gates.append(NativeGate("rx", (0,), -2.0 * gamma))
    if delta != 0.0:
        gates.append(NativeGate("rz", (1,), -2.0 * delta))
    if len(gates) == 1:
        # keep the identity gate's shape stable: emit the rotation anyway
        gates.append(NativeGate("rx", (0,), 0.0))
    gates.append(NativeGate("cx", (0, 1)))
    return gates


_SANDWICH = {
    "none": ((), ()),
    "u1": (
        (NativeGate("rz", (0,), -math.pi / 2), NativeGate("rz", (1,), -math.pi / 2)),
        (NativeGate("rz", (0,), math.pi / 2), NativeGate("rz", (1,), math.pi / 2)),
    ),
    "u2": (
        (NativeGate("rx", (0,), -math.pi / 2), NativeGate("rx", (1,), -math.pi / 2)),
        (NativeGate("rx", (0,), math.pi / 2), NativeGate("rx", (1,), math.pi / 2)),
    ),
}

_CLASS_CONJUGATION = {
    HamiltonianClass.X: "none",
    HamiltonianClass.Y: "u1",
    HamiltonianClass.Z: "none",
    HamiltonianClass.XY: "u2",
    HamiltonianClass.XZ: "none",
    HamiltonianClass.YZ: "u1",
}

_PARAM_TOL = 1e-9


def class_conjugation(klass: HamiltonianClass) -> str:
    if klass is HamiltonianClass.XYZ:
        raise ValueError("class XYZ is outside the R(gamma, delta) family")
    return _CLASS_CONJUGATION[klass]


def special_case_sequence(klass: HamiltonianClass, p: RGateParams) -> GateSequence:
    """Two-CX native circuit for one Table-class propagator.

    The evaluated unitary equals conjugated_r_matrix(p, tag) for the class
    conjugator tag, exactly for the none-tag classes and up to global phase
    otherwise. Single-axis classes require the unused parameter to be zero.
    """
    if klass is HamiltonianClass.XYZ:
        raise ValueError("class XYZ has no fixed two-CX circuit; use decompose_xyz")
    if klass in (HamiltonianClass.X, HamiltonianClass.Y) and abs(p.delta) > _PARAM_TOL:
        raise ValueError(f"class {klass.value} requires delta = 0, got {p.delta!r}")
    if klass is HamiltonianClass.Z and abs(p.gamma) > _PARAM_TOL:
        raise ValueError(f"class Z requires gamma = 0, got {p.gamma!r}")
    before, after = _SANDWICH[_CLASS_CONJUGATION[klass]]
    return tuple([*before, *_xz_core(p.gamma, p.delta), *after])


def sequence_unitary(seq: GateSequence) -> np.ndarray:
    """Evaluate a two-qubit native sequence to its 4x4 unitary (time order)."""
    u = np.eye(4, dtype=complex)
    for gate in seq:
        if gate.kind == "cx":
            g = CX_MATRIX if gate.qubits == (0, 1) else CX_REVERSED_MATRIX
        else:
            m = native_gate_matrix(gate)
            g = np.kron(m, np.eye(2)) if gate.qubits == (0,) else np.kron(np.eye(2), m)
        u = g @ u
    return u
