"""Rewrite engine for alternating-layer circuits of R(gamma, delta) gates.

Three rewrites preserve the circuit unitary up to global phase: merging two
same-pair gates by parameter addition, the three-gate bridge move, and block
reflection. The absorption loop combines them so that any number of
alternating layers collapses into a block of at most N(N-1)/2 gates laid out
on an N-slot alternating template.

Internally a circuit is tracked as a word of letters [pair, gamma, delta]
together with the permutation its pair swaps generate. A new gate either
extends the word (the permutation grows) or, after rewriting the word to end
on the same pair, merges into the last letter (the permutation is already
saturated there). Emission peels the permutation back into template slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit_ir import Circuit, PairGate, columnize
from .propagators import Angles3, RGateParams, class_conjugation
from .spin_model import ZERO_TOL, HamiltonianClass
from .ybe import YbeForm, YbeTriple, solve, wrap_angle

RESIDUAL_BUDGET = 1e-6


class UnsupportedClassError(ValueError):
    """Gate set falls outside the six two-parameter families."""


class ResidualBudgetError(RuntimeError):
    """Accumulated rewrite residual exceeded RESIDUAL_BUDGET."""


@dataclass(frozen=True)
class RewriteMove:
    """One local rewrite: kind 'merge' or 'ybe' at a gate-list position.

    For 'ybe', direction names the layout of the matched triple (LEFT means
    outer gates on the lower pair) and the move rewrites it to the opposite
    layout. For 'merge', position addresses the earlier of the two gates.
    """

    kind: str
    position: int
    direction: YbeForm | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("merge", "ybe"):
            raise ValueError(f"unknown move kind {self.kind!r}")
        if self.position < 0:
            raise ValueError(f"position must be nonnegative, got {self.position}")
        if self.kind == "ybe" and self.direction is None:
            raise ValueError("ybe moves need a direction")
        if self.kind == "merge" and self.direction is not None:
            raise ValueError("merge moves take no direction")


@dataclass(frozen=True)
class CompressedBlock:
    """Alternating-template block equivalent to a deep circuit.

    slots maps each of the N template slots to gate indices of circuit;
    slot k holds even pairs when (k + flip) % 2 == 0, odd pairs otherwise.
    residual is the summed verified residual of every bridge move behind
    the block; ybe_moves counts them.
    """

    circuit: Circuit
    klass: HamiltonianClass
    conjugation: str
    residual: float
    ybe_moves: int
    slots: tuple[tuple[int, ...], ...]
    flip: bool = False

    def __post_init__(self) -> None:
        n = self.circuit.num_qubits
        if self.klass is HamiltonianClass.XYZ:
            raise UnsupportedClassError("blocks cannot carry the three-parameter class")
        bound = n * (n - 1) // 2
        if len(self.circuit.gates) > bound:
            raise ValueError(
                f"{len(self.circuit.gates)} gates exceed the {bound}-gate bound"
            )
        if not math.isfinite(self.residual) or self.residual < 0.0:
            raise ValueError(f"residual must be finite and nonnegative, got {self.residual!r}")
        if self.ybe_moves < 0:
            raise ValueError(f"ybe_moves must be nonnegative, got {self.ybe_moves!r}")
        if len(self.slots) != n:
            raise ValueError(f"need {n} template slots, got {len(self.slots)}")
        flat = sorted(i for s in self.slots for i in s)
        if flat != list(range(len(self.circuit.gates))):
            raise ValueError("slots must partition the gate list")
        for k, idxs in enumerate(self.slots):
            par = (k + int(self.flip)) % 2
            for i in idxs:
                g = self.circuit.gates[i]
                if g.pair % 2 != par:
                    raise ValueError(f"gate on pair {g.pair} misplaced in slot {k}")
                if not isinstance(g.params, RGateParams):
                    raise TypeError("block gates must carry RGateParams")
                if g.conjugation != self.conjugation:
                    raise ValueError("block gates must share the block conjugation tag")

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits

    @property
    def gate_count(self) -> int:
        return len(self.circuit.gates)

    @property
    def alternating_layers(self) -> int:
        used = sum(1 for s in self.slots if s)
        return (used + 1) // 2


def merge(a: PairGate, b: PairGate) -> PairGate:
    """Combine two same-pair gates into one by componentwise parameter addition.

    Valid because same-pair propagators of one family commute and their
    exponents add exactly.
    """
    if a.pair != b.pair:
        raise ValueError(f"cannot merge gates on pairs {a.pair} and {b.pair}")
    if type(a.params) is not type(b.params):
        raise ValueError("cannot merge gates with different parameter kinds")
    if a.conjugation != b.conjugation:
        raise ValueError("cannot merge gates with different conjugation tags")
    if isinstance(a.params, Angles3):
        params: Angles3 | RGateParams = Angles3(
            a.params.theta_x + b.params.theta_x,
            a.params.theta_y + b.params.theta_y,
            a.params.theta_z + b.params.theta_z,
        )
    else:
        params = RGateParams(
            a.params.gamma + b.params.gamma, a.params.delta + b.params.delta
        )
    return PairGate(a.pair, params, a.conjugation)


def _bridge_form(c: Circuit, pos: int) -> YbeForm:
    if pos < 0 or pos + 3 > len(c.gates):
        raise ValueError(f"no gate triple at position {pos}")
    p0, p1, p2 = (c.gates[pos + k].pair for k in range(3))
    if p0 != p2 or abs(p1 - p0) != 1:
        raise ValueError(
            f"gates at position {pos} lie on pairs ({p0}, {p1}, {p2}), not a bridge"
        )
    return YbeForm.LEFT if p0 < p1 else YbeForm.RIGHT


def apply_ybe_move(c: Circuit, move: RewriteMove) -> Circuit:
    """Rewrite three consecutive bridge-pattern gates into the mirrored layout."""
    if move.kind != "ybe":
        raise ValueError(f"expected a ybe move, got {move.kind!r}")
    form = _bridge_form(c, move.position)
    if move.direction is not form:
        raise ValueError(
            f"move direction {move.direction} does not match the {form} pattern found"
        )
    g0, g1, g2 = c.gates[move.position : move.position + 3]
    for g in (g0, g1, g2):
        if not isinstance(g.params, RGateParams):
            raise TypeError("bridge moves require RGateParams gates")
    if not (g0.conjugation == g1.conjugation == g2.conjugation):
        raise ValueError("bridge moves require a uniform conjugation tag")
    # operator order is the reverse of time order
    sol = solve(YbeTriple((g2.params, g1.params, g0.params), form))
    o1, o2, o3 = sol.triple.gates
    conj = g0.conjugation
    new = (
        PairGate(g1.pair, RGateParams(*_wrap_pair(o3)), conj),
        PairGate(g0.pair, RGateParams(*_wrap_pair(o2)), conj),
        PairGate(g1.pair, RGateParams(*_wrap_pair(o1)), conj),
    )
    gates = c.gates[: move.position] + new + c.gates[move.position + 3 :]
    return columnize(Circuit(c.num_qubits, gates))


def apply_merge_move(c: Circuit, move: RewriteMove) -> Circuit:
    """Merge the gate at position with the next gate touching its qubits."""
    if move.kind != "merge":
        raise ValueError(f"expected a merge move, got {move.kind!r}")
    if move.position >= len(c.gates):
        raise ValueError(f"no gate at position {move.position}")
    a = c.gates[move.position]
    span = {a.pair, a.pair + 1}
    for j in range(move.position + 1, len(c.gates)):
        b = c.gates[j]
        if span & {b.pair, b.pair + 1}:
            if b.pair != a.pair:
                raise ValueError(
                    f"gate at {j} touches the merge qubits but sits on pair {b.pair}"
                )
            gates = (
                c.gates[: move.position]
                + (merge(a, b),)
                + c.gates[move.position + 1 : j]
                + c.gates[j + 1 :]
            )
            return columnize(Circuit(c.num_qubits, gates))
    raise ValueError(f"no merge partner after position {move.position}")


def _wrap_pair(p: RGateParams) -> tuple[float, float]:
    return float(wrap_angle(p.gamma)), float(wrap_angle(p.delta))


class _WordEngine:
    """Mutable word-and-permutation state behind absorb/emit."""

    def __init__(self, n: int, base_residual: float = 0.0) -> None:
        self.n = n
        self.perm = list(range(n))
        self.word: list[list[float]] = []
        self.residual = base_residual
        self.moves = 0

    def load(self, word: list[list[float]]) -> None:
        for letter in word:
            j = int(letter[0])
            if self.perm[j] >= self.perm[j + 1]:
                raise ValueError("block word is not reduced; cannot reload")
            self.perm[j], self.perm[j + 1] = self.perm[j + 1], self.perm[j]
        self.word = [list(letter) for letter in word]

    def _solve(self, trip: tuple) -> tuple:
        gates = tuple(RGateParams(float(g), float(d)) for g, d in trip)
        sol = solve(YbeTriple(gates, YbeForm.LEFT))
        self.residual += sol.residual
        self.moves += 1
        if self.residual > RESIDUAL_BUDGET:
            raise ResidualBudgetError(
                f"accumulated residual {self.residual:.3e} exceeds {RESIDUAL_BUDGET:g}"
            )
        return sol.triple.angles()

    def _braid(self, f: list, h: list, g: list) -> tuple[list, list, list]:
        # time-ordered letters f@j, h@i, g@j with |i-j| = 1 become a@i, b@j, c@i;
        # the mirrored output triple solves both layout orientations, so one
        # solver direction covers j < i and j > i alike
        j, i = int(f[0]), int(h[0])
        r = self._solve(((g[1], g[2]), (h[1], h[2]), (f[1], f[2])))
        return (
            [i, r[2][0], r[2][1]],
            [j, r[1][0], r[1][1]],
            [i, r[0][0], r[0][1]],
        )

    def _mew(self, w: list, i: int) -> list:
        # rewrite reduced word w to end with a letter on pair i;
        # precondition: swapping (i, i+1) shortens perm(w)
        j = int(w[-1][0])
        if j == i:
            return w
        if abs(i - j) >= 2:
            v = self._mew(w[:-1], i)
            return v[:-1] + [w[-1], v[-1]]
        v = self._mew(w[:-1], i)
        u = self._mew(v[:-1], j)
        a, b, c = self._braid(u[-1], v[-1], w[-1])
        return u[:-1] + [a, b, c]

    def absorb(self, j: int, gamma: float, delta: float) -> None:
        if self.perm[j] < self.perm[j + 1]:
            self.perm[j], self.perm[j + 1] = self.perm[j + 1], self.perm[j]
            self.word.append([j, gamma, delta])
            return
        self.word = self._mew(self.word, j)
        self.word[-1][1] += gamma
        self.word[-1][2] += delta

    def emit(self, flip: bool) -> list[list[list[float]]]:
        """Rebuild the word right-to-left into the alternating-slot template."""
        slots = _peel_template(self.perm, self.n, flip)
        if slots is None:
            raise RuntimeError(f"template peel failed for permutation {self.perm}")
        out: list[list[list[float]]] = [[] for _ in range(self.n)]
        w = list(self.word)
        for k in range(self.n - 1, -1, -1):
            for j in slots[k]:
                w = self._mew(w, j)
                letter = w.pop()
                out[k].insert(
                    0, [j, float(wrap_angle(letter[1])), float(wrap_angle(letter[2]))]
                )
        if w:
            raise RuntimeError("emission left letters behind")
        return out


def _peel_template(perm: list[int], n: int, flip: bool) -> list[list[int]] | None:
    """Greedy right-to-left peel of a permutation into n alternating slots."""
    sigma = list(perm)
    slots: list[list[int]] = [[] for _ in range(n)]
    for k in range(n - 1, -1, -1):
        start = 0 if (k + int(flip)) % 2 == 0 else 1
        for j in range(start, n - 1, 2):
            if sigma[j] > sigma[j + 1]:
                sigma[j], sigma[j + 1] = sigma[j + 1], sigma[j]
                slots[k].append(j)
    return slots if sigma == sorted(sigma) else None


_CLASS_PARAMS = {
    HamiltonianClass.X: lambda a: (a.theta_x, 0.0),
    HamiltonianClass.Y: lambda a: (a.theta_y, 0.0),
    HamiltonianClass.Z: lambda a: (0.0, a.theta_z),
    HamiltonianClass.XY: lambda a: (a.theta_x, a.theta_y),
    HamiltonianClass.XZ: lambda a: (a.theta_x, a.theta_z),
    HamiltonianClass.YZ: lambda a: (a.theta_y, a.theta_z),
}


def _active_axes(a: Angles3) -> set[str]:
    axes = set()
    for axis, theta in zip("xyz", a.as_tuple()):
        if abs(theta) > ZERO_TOL:
            axes.add(axis)
    return axes


def _class_from_axes(axes: set[str]) -> HamiltonianClass:
    if not axes:
        return HamiltonianClass.X
    for klass in HamiltonianClass:
        if set(klass.axes) == axes:
            return klass
    raise UnsupportedClassError(f"no gate family covers axes {sorted(axes)}")


def _r_form_gate(g: PairGate, klass: HamiltonianClass, conj: str) -> PairGate:
    if isinstance(g.params, RGateParams):
        if g.conjugation != conj:
            raise ValueError(
                f"gate conjugation {g.conjugation!r} does not match the block's {conj!r}"
            )
        return g
    axes = _active_axes(g.params)
    if not axes <= set(klass.axes):
        raise ValueError(
            f"gate with axes {sorted(axes)} does not fit class {klass.name}"
        )
    gamma, delta = _CLASS_PARAMS[klass](g.params)
    return PairGate(g.pair, RGateParams(gamma, delta), conj)


def _block_from_slots(
    n: int,
    slot_letters: list[list[list[float]]],
    klass: HamiltonianClass,
    conj: str,
    residual: float,
    moves: int,
    flip: bool,
) -> CompressedBlock:
    gates: list[PairGate] = []
    slots: list[tuple[int, ...]] = []
    for letters in slot_letters:
        idxs = []
        for j, gamma, delta in letters:
            idxs.append(len(gates))
            gates.append(PairGate(int(j), RGateParams(float(gamma), float(delta)), conj))
        slots.append(tuple(idxs))
    columns = tuple(s for s in slots if s)
    circ = Circuit(n, tuple(gates), columns)
    return CompressedBlock(circ, klass, conj, residual, moves, tuple(slots), flip)


def empty_block(
    n: int,
    klass: HamiltonianClass = HamiltonianClass.X,
    conjugation: str | None = None,
) -> CompressedBlock:
    """The identity block: no gates, all template slots free."""
    conj = class_conjugation(klass) if conjugation is None else conjugation
    return _block_from_slots(n, [[] for _ in range(n)], klass, conj, 0.0, 0, False)


def _engine_for(block: CompressedBlock) -> _WordEngine:
    eng = _WordEngine(block.num_qubits, base_residual=block.residual)
    word = [
        [g.pair, g.params.gamma, g.params.delta]
        for g in (block.circuit.gates[i] for s in block.slots for i in s)
    ]
    eng.load(word)
    return eng


def absorb_layer(block: CompressedBlock, layer: list[PairGate]) -> CompressedBlock:
    """Fold one alternating layer of gates into the block.

    layer is a time-ordered gate list sharing the block's class; the result
    is re-emitted onto the template, so size bounds hold after every call.
    """
    eng = _engine_for(block)
    for g in layer:
        rg = _r_form_gate(g, block.klass, block.conjugation)
        eng.absorb(rg.pair, rg.params.gamma, rg.params.delta)
    letters = eng.emit(block.flip)
    return _block_from_slots(
        block.num_qubits,
        letters,
        block.klass,
        block.conjugation,
        eng.residual,
        block.ybe_moves + eng.moves,
        block.flip,
    )


def reflect_block(block: CompressedBlock) -> CompressedBlock:
    """Mirror the block's template alignment (even-start <-> odd-start)."""
    eng = _engine_for(block)
    flip = not block.flip
    letters = eng.emit(flip)
    return _block_from_slots(
        block.num_qubits,
        letters,
        block.klass,
        block.conjugation,
        eng.residual,
        block.ybe_moves + eng.moves,
        flip,
    )


def _detect_class(c: Circuit) -> tuple[HamiltonianClass, str]:
    kinds = {type(g.params) for g in c.gates}
    if len(kinds) > 1:
        raise UnsupportedClassError("cannot compress mixed parameter kinds")
    if kinds == {Angles3}:
        axes: set[str] = set()
        for g in c.gates:
            axes |= _active_axes(g.params)
        klass = _class_from_axes(axes)
        if klass is HamiltonianClass.XYZ:
            raise UnsupportedClassError(
                "three-axis couplings are outside the compressible families"
            )
        return klass, class_conjugation(klass)
    tags = {g.conjugation for g in c.gates}
    if len(tags) > 1:
        raise UnsupportedClassError("cannot compress mixed conjugation tags")
    conj = tags.pop()
    has_g = any(abs(g.params.gamma) > ZERO_TOL for g in c.gates)
    has_d = any(abs(g.params.delta) > ZERO_TOL for g in c.gates)
    if conj == "u2":
        klass = HamiltonianClass.XY
    elif conj == "u1":
        klass = HamiltonianClass.YZ if has_d else HamiltonianClass.Y
    elif has_g and has_d:
        klass = HamiltonianClass.XZ
    elif has_d:
        klass = HamiltonianClass.Z
    else:
        klass = HamiltonianClass.X
    return klass, conj


def compress(c: Circuit) -> CompressedBlock:
    """Absorb a whole alternating-layer circuit into one template block.

    The gate count of the result is at most N(N-1)/2 regardless of how many
    layers went in. Raises UnsupportedClassError for three-axis gate sets
    and propagates UnsolvedError from the bridge solver.
    """
    if not c.gates:
        return empty_block(c.num_qubits)
    cc = c if c.columns is not None else columnize(c)
    klass, conj = _detect_class(cc)
    block = empty_block(cc.num_qubits, klass, conj)
    cols = cc.columns
    for start in range(0, len(cols), 2):
        layer = [cc.gates[i] for col in cols[start : start + 2] for i in col]
        block = absorb_layer(block, layer)
    return block


def pad_to_template(block: CompressedBlock) -> CompressedBlock:
    """Fill every free template position with an identity gate.

    The unitary is unchanged; the gate count becomes exactly N(N-1)/2,
    making per-step counts of the compressed circuit shape-stable.
    """
    n = block.num_qubits
    letters: list[list[list[float]]] = []
    for k, idxs in enumerate(block.slots):
        have = {block.circuit.gates[i].pair: block.circuit.gates[i] for i in idxs}
        start = 0 if (k + int(block.flip)) % 2 == 0 else 1
        row = []
        for j in range(start, n - 1, 2):
            g = have.get(j)
            if g is None:
                row.append([j, 0.0, 0.0])
            else:
                row.append([j, g.params.gamma, g.params.delta])
        letters.append(row)
    return _block_from_slots(
        n, letters, block.klass, block.conjugation, block.residual,
        block.ybe_moves, block.flip,
    )
