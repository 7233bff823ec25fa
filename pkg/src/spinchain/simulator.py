"""Dense reference dynamics: Hamiltonian builder, exact propagator,
statevector circuit execution, staggered magnetization, and a seeded
depolarizing Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _dense
from .circuit_ir import (
    MAX_DENSE_QUBITS,
    Circuit,
    NativeCircuit,
    PairGate,
    build_trotter_circuit,
    to_native,
)
from .compressor import UnsupportedClassError, absorb_layer, empty_block, pad_to_template
from .propagators import native_gate_matrix
from .spin_model import CouplingParams, HamiltonianClass, TrotterPlan, classify

MODES = ("exact", "trotter", "compressed")

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_SINGLE_ERRORS = (_PAULI_X, _PAULI_Y, _PAULI_Z)
_PAIR_ERRORS = tuple(
    np.kron(a, b)
    for i, a in enumerate((np.eye(2, dtype=complex),) + _SINGLE_ERRORS)
    for j, b in enumerate((np.eye(2, dtype=complex),) + _SINGLE_ERRORS)
    if (i, j) != (0, 0)
)

_NOISE_CHUNK = 1024


def _check_size(n: int) -> None:
    if not 2 <= n <= MAX_DENSE_QUBITS:
        raise ValueError(f"dense engine supports 2..{MAX_DENSE_QUBITS} qubits, got {n}")


def build_hamiltonian(n: int, j: CouplingParams) -> np.ndarray:
    """H = -sum_alpha J_alpha sum_i sigma^alpha_i sigma^alpha_{i+1}, open chain.

    Returned as a real symmetric matrix (the XX, YY, ZZ strings all have
    real elements); qubit 0 is the most significant basis bit.
    """
    _check_size(n)
    dim = 1 << n
    h = np.zeros((dim, dim))
    b = np.arange(dim)
    for q in range(n - 1):
        hi = n - 1 - q
        lo = n - 2 - q
        mask = (1 << hi) | (1 << lo)
        sign = 1.0 - 2.0 * (((b >> hi) ^ (b >> lo)) & 1)  # (-1)^(bit_q + bit_{q+1})
        np.add.at(h, (b ^ mask, b), -j.jx + j.jy * sign)
        np.add.at(h, (b, b), -j.jz * sign)
    return h


def exact_propagator(h: np.ndarray, t: float) -> np.ndarray:
    """e^{-iHt} via Hermitian eigendecomposition."""
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
    if h.shape[0] > 1 << MAX_DENSE_QUBITS:
        raise ValueError(f"dimension {h.shape[0]} exceeds the dense size guard")
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def basis_state(n: int, bits: str) -> np.ndarray:
    """Computational basis state from a bitstring; qubit 0 is the first char."""
    if len(bits) != n or any(ch not in "01" for ch in bits):
        raise ValueError(f"need a length-{n} bitstring of 0/1, got {bits!r}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return amps


def neel_state(n: int) -> np.ndarray:
    """Alternating product state: spin up (|0>) on even sites, starting at site 0."""
    if n < 1:
        raise ValueError(f"need at least 1 qubit, got {n}")
    return basis_state(n, "01" * (n // 2) + "0" * (n % 2))


def apply_circuit(state: np.ndarray, c: Circuit | NativeCircuit) -> np.ndarray:
    """Apply every gate of c to the statevector, in circuit order."""
    dim = 1 << c.num_qubits
    out = np.asarray(state, dtype=complex)
    if out.shape[0] != dim:
        raise ValueError(
            f"state has dimension {out.shape[0]}, circuit needs {dim}"
        )
    for g in c.gates:
        if isinstance(g, PairGate):
            out = _dense.apply_gate(out, g.unitary(), (g.pair, g.pair + 1), c.num_qubits)
        else:
            out = _dense.apply_gate(out, native_gate_matrix(g), g.qubits, c.num_qubits)
    return out


def _staggered_weights(n: int) -> np.ndarray:
    b = np.arange(1 << n)
    w = np.zeros(1 << n)
    for i in range(n):
        bit = (b >> (n - 1 - i)) & 1
        w += (-1.0) ** i * (1.0 - 2.0 * bit)
    return w / n


def staggered_magnetization(state: np.ndarray) -> float:
    """m_s = (1/N) sum_i (-1)^i <sigma_z at site i>; +1 on the Neel state."""
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError(f"state dimension {dim} is not a power of two")
    return float(_staggered_weights(n) @ np.abs(state) ** 2)


@dataclass(frozen=True)
class ObservableSeries:
    """Rows of (step, time, m_s) on a uniform grid, step 0 first."""

    rows: tuple[tuple[int, float, float], ...]

    def __post_init__(self) -> None:
        times = [t for _, t, _ in self.rows]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("times must be strictly increasing")
        for _, _, m in self.rows:
            if abs(m) > 1.0 + 1e-9:
                raise ValueError(f"|m_s| = {abs(m)} exceeds 1")

    def values(self) -> np.ndarray:
        return np.array([m for _, _, m in self.rows])

    def to_csv(self) -> str:
        lines = ["step,time,m_s"]
        for step, t, m in self.rows:
            lines.append(f"{step},{t:.17g},{m:.17g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing gate noise: error probability p1 after single-qubit gates,
    p2 after cx; a uniformly random non-identity Pauli lands on the touched
    qubits. shots Monte Carlo repetitions from per-shot substreams seed+shot."""

    p1: float
    p2: float
    shots: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p!r}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


def _series(plan: TrotterPlan, values: list[float]) -> ObservableSeries:
    times = plan.times()
    return ObservableSeries(
        tuple((k, times[k], float(values[k])) for k in range(len(values)))
    )


def _exact_series(n, j, plan, init):
    vals, vecs = np.linalg.eigh(build_hamiltonian(n, j))
    proj = vecs.conj().T @ init
    # step 0 is the bare initial state; skip the projection round-trip
    out = [staggered_magnetization(init)]
    for t in plan.times()[1:]:
        amps = vecs @ (np.exp(-1j * vals * t) * proj)
        out.append(staggered_magnetization(amps))
    return out


def _trotter_series(n, j, plan, init):
    step = build_trotter_circuit(n, j, TrotterPlan(plan.dt, plan.dt))
    state = init
    out = [staggered_magnetization(state)]
    for _ in range(plan.num_steps):
        state = apply_circuit(state, step)
        out.append(staggered_magnetization(state))
    return out


def _compressed_series(n, j, plan, init):
    klass = classify(j)
    if klass is HamiltonianClass.XYZ:
        raise UnsupportedClassError(
            "three-axis couplings are outside the compressible families"
        )
    step = build_trotter_circuit(n, j, TrotterPlan(plan.dt, plan.dt))
    block = empty_block(n, klass)
    out = [staggered_magnetization(init)]
    for _ in range(plan.num_steps):
        block = absorb_layer(block, list(step.gates))
        padded = pad_to_template(block)
        state = apply_circuit(init, padded.circuit)
        out.append(staggered_magnetization(state))
    return out


def run_dynamics(
    n: int,
    j: CouplingParams,
    plan: TrotterPlan,
    mode: str,
    init_state: np.ndarray | None = None,
) -> ObservableSeries:
    """Staggered-magnetization series under one of the three engines.

    exact evaluates e^{-iHt} snapshots on the step grid; trotter applies one
    alternating layer per step; compressed absorbs each step's layer into a
    template block and applies the (identity-padded) block to the initial
    state. All start from the Neel state unless init_state is given.
    """
    _check_size(n)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    init = neel_state(n) if init_state is None else np.asarray(init_state, dtype=complex)
    if init.shape[0] != 1 << n:
        raise ValueError(f"initial state has dimension {init.shape[0]}, need {1 << n}")
    runner = {
        "exact": _exact_series,
        "trotter": _trotter_series,
        "compressed": _compressed_series,
    }[mode]
    return _series(plan, runner(n, j, plan, init))


def _noisy_trajectory(
    native: NativeCircuit,
    num_steps: int,
    noise: NoiseModel,
    init: np.ndarray,
    observable,
) -> np.ndarray:
    """Repeat the step circuit num_steps times; observable per shot per step.

    Returns shape (num_steps + 1, shots), row 0 for the initial state. Shot s
    consumes exactly the (num_steps * len(gates), 2) uniform block of
    default_rng(seed + s), so results are independent of chunked batching.
    """
    n = native.num_qubits
    gates = [(g, native_gate_matrix(g)) for g in native.gates]
    total = num_steps * len(gates)
    values = np.empty((num_steps + 1, noise.shots))
    for base in range(0, noise.shots, _NOISE_CHUNK):
        count = min(_NOISE_CHUNK, noise.shots - base)
        draws = np.empty((count, total, 2))
        for s in range(count):
            draws[s] = np.random.default_rng(noise.seed + base + s).random((total, 2))
        states = np.repeat(init[:, None], count, axis=1)
        for s in range(count):
            values[0, base + s] = observable(states[:, s])
        for step in range(num_steps):
            for gi, (g, mat) in enumerate(gates):
                states = _dense.apply_gate(states, mat, g.qubits, n)
                di = step * len(gates) + gi
                p = noise.p2 if g.kind == "cx" else noise.p1
                if p <= 0.0:
                    continue
                hit = draws[:, di, 0] < p
                if not hit.any():
                    continue
                errors = _PAIR_ERRORS if g.kind == "cx" else _SINGLE_ERRORS
                choice = np.minimum(
                    (draws[:, di, 1] * len(errors)).astype(int), len(errors) - 1
                )
                for v, pauli in enumerate(errors):
                    cols = hit & (choice == v)
                    if cols.any():
                        states[:, cols] = _dense.apply_gate(
                            states[:, cols], pauli, g.qubits, n
                        )
            for s in range(count):
                values[step + 1, base + s] = observable(states[:, s])
    return values


def _mean_stderr(row: np.ndarray, shots: int) -> tuple[float, float]:
    mean = float(row.mean())
    stderr = float(row.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    return mean, stderr


def run_noisy(
    c: Circuit | NativeCircuit,
    noise: NoiseModel,
    init_state: np.ndarray | None = None,
    observable=staggered_magnetization,
) -> tuple[float, float]:
    """Monte Carlo observable under depolarizing gate noise: (mean, stderr).

    Noise acts on the native-gate expansion, so circuits with fewer native
    gates accumulate fewer error events. Deterministic for fixed seed and
    shots: shot s consumes exactly the (len(gates), 2) uniform block of
    default_rng(seed + s), independent of batching.
    """
    native = to_native(c) if isinstance(c, Circuit) else c
    n = native.num_qubits
    init = neel_state(n) if init_state is None else np.asarray(init_state, dtype=complex)
    if init.shape[0] != 1 << n:
        raise ValueError(f"initial state has dimension {init.shape[0]}, need {1 << n}")
    values = _noisy_trajectory(native, 1, noise, init, observable)
    return _mean_stderr(values[1], noise.shots)


def run_noisy_series(
    step: Circuit | NativeCircuit,
    num_steps: int,
    noise: NoiseModel,
    init_state: np.ndarray | None = None,
    observable=staggered_magnetization,
) -> list[tuple[float, float]]:
    """Noisy trajectory means: repeat the step circuit and record after each step.

    Returns num_steps + 1 rows of (mean, stderr) including the initial state.
    The final row equals run_noisy on the num_steps-fold circuit because the
    per-shot uniform stream is consumed identically.
    """
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    native = to_native(step) if isinstance(step, Circuit) else step
    n = native.num_qubits
    init = neel_state(n) if init_state is None else np.asarray(init_state, dtype=complex)
    if init.shape[0] != 1 << n:
        raise ValueError(f"initial state has dimension {init.shape[0]}, need {1 << n}")
    values = _noisy_trajectory(native, num_steps, noise, init, observable)
    return [_mean_stderr(values[k], noise.shots) for k in range(num_steps + 1)]
