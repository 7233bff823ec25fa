"""Merge and braid rewrites, layer absorption, fixed-depth blocks."""

import numpy as np
import pytest

from spinchain._dense import phase_distance
from spinchain.circuit_ir import Circuit, PairGate, build_trotter_circuit, unitary_of
from spinchain.compressor import (
    CompressedBlock,
    RewriteMove,
    UnsupportedClassError,
    absorb_layer,
    apply_merge_move,
    apply_ybe_move,
    compress,
    empty_block,
    merge,
    pad_to_template,
    reflect_block,
)
from spinchain.propagators import RGateParams
from spinchain.spin_model import Angles3, CouplingParams, HamiltonianClass, TrotterPlan
from spinchain.ybe import YbeForm

TRIALS = 100
TOL = 1e-12
PHASE_TOL = 1e-7
SEED = 1632


def max_gate_count(n):
    return n * (n - 1) // 2


def random_xy_layers(rng, n, num_layers):
    # valid alternating-layer input: even pairs then odd pairs, fresh angles
    gates = []
    for layer in range(num_layers):
        start = 0 if layer % 2 == 0 else 1
        for p in range(start, n - 1, 2):
            gates.append(PairGate(p, Angles3(*rng.uniform(-0.8, 0.8, 2), 0.0)))
    return Circuit(n, tuple(gates))


def test_merge_adds_componentwise():
    # exact float addition, no rounding beyond the sums themselves
    a = PairGate(1, Angles3(0.1, 0.2, 0.3))
    b = PairGate(1, Angles3(0.4, -0.2, 0.05))
    m = merge(a, b)
    assert m.params == Angles3(0.1 + 0.4, 0.2 + -0.2, 0.3 + 0.05)
    ra = PairGate(0, RGateParams(0.3, -0.1), "u2")
    rb = PairGate(0, RGateParams(0.2, 0.4), "u2")
    rm = merge(ra, rb)
    assert rm.params == RGateParams(0.3 + 0.2, -0.1 + 0.4)
    assert rm.conjugation == "u2"


def test_merge_matches_matrix_product():
    rng = np.random.default_rng(SEED)
    for _ in range(TRIALS):
        a = PairGate(0, Angles3(*rng.uniform(-1.0, 1.0, 3)))
        b = PairGate(0, Angles3(*rng.uniform(-1.0, 1.0, 3)))
        m = merge(a, b)
        assert np.max(np.abs(b.unitary() @ a.unitary() - m.unitary())) < TOL


def test_merge_rejects_mismatched_gates():
    with pytest.raises(ValueError):
        merge(PairGate(0, Angles3(0.1, 0.0, 0.0)), PairGate(1, Angles3(0.1, 0.0, 0.0)))
    with pytest.raises(ValueError):
        merge(PairGate(0, Angles3(0.1, 0.0, 0.0)), PairGate(0, RGateParams(0.1, 0.0)))
    with pytest.raises(ValueError):
        merge(
            PairGate(0, RGateParams(0.1, 0.0), "u1"),
            PairGate(0, RGateParams(0.1, 0.0), "u2"),
        )


def test_rewrite_move_validation():
    RewriteMove("merge", 0)
    RewriteMove("ybe", 2, direction=YbeForm.LEFT)
    with pytest.raises(ValueError):
        RewriteMove("ybe", 0)  # braid move needs a direction
    with pytest.raises(ValueError):
        RewriteMove("merge", 0, direction=YbeForm.LEFT)
    with pytest.raises(ValueError):
        RewriteMove("squash", 0)
    with pytest.raises(ValueError):
        RewriteMove("merge", -1)


def test_apply_ybe_move_mirrors_bridge():
    rng = np.random.default_rng(SEED + 1)
    for _ in range(40):
        gates = tuple(
            PairGate(p, RGateParams(*rng.uniform(-1.2, 1.2, 2)))
            for p in (0, 1, 0)
        )
        c = Circuit(3, gates)
        out = apply_ybe_move(c, RewriteMove("ybe", 0, direction=YbeForm.LEFT))
        assert [g.pair for g in out.gates] == [1, 0, 1]
        assert phase_distance(unitary_of(out), unitary_of(c)) < 1e-8


def test_apply_ybe_move_direction_must_match_layout():
    gates = tuple(PairGate(p, RGateParams(0.2, 0.1)) for p in (0, 1, 0))
    c = Circuit(3, gates)
    with pytest.raises(ValueError):
        apply_ybe_move(c, RewriteMove("ybe", 0, direction=YbeForm.RIGHT))


def test_apply_merge_move_combines_same_pair():
    gates = (
        PairGate(0, Angles3(0.1, 0.2, 0.0)),
        PairGate(0, Angles3(0.3, -0.1, 0.0)),
        PairGate(1, Angles3(0.5, 0.0, 0.0)),
    )
    c = Circuit(3, gates)
    out = apply_merge_move(c, RewriteMove("merge", 0))
    assert len(out.gates) == 2
    assert out.gates[0].params == Angles3(0.4, 0.1, 0.0)
    assert phase_distance(unitary_of(out), unitary_of(c)) < TOL


def test_apply_merge_move_rejects_blocked_pair():
    gates = (
        PairGate(0, Angles3(0.1, 0.0, 0.0)),
        PairGate(1, Angles3(0.3, 0.0, 0.0)),  # touches qubit 1, blocks the scan
        PairGate(0, Angles3(0.2, 0.0, 0.0)),
    )
    with pytest.raises(ValueError):
        apply_merge_move(Circuit(3, gates), RewriteMove("merge", 0))


def test_empty_block_shape():
    block = empty_block(4, HamiltonianClass.XY)
    assert block.gate_count == 0
    assert block.num_qubits == 4
    assert block.residual == 0.0
    assert block.ybe_moves == 0
    assert block.klass is HamiltonianClass.XY


def test_compress_trotter_bounds_and_unitary():
    j = CouplingParams(-0.8, -0.2, 0.0)
    for n in (2, 3, 4, 5):
        for steps in (1, 3, 7):
            plan = TrotterPlan(steps * 0.05, 0.05)
            c = build_trotter_circuit(n, j, plan)
            block = compress(c)
            assert block.gate_count <= max_gate_count(n)
            assert phase_distance(unitary_of(block.circuit), unitary_of(c)) < PHASE_TOL
            assert block.residual < 1e-9


def test_compress_step_count_independence():
    j = CouplingParams(0.6, 0.0, -0.3)
    shapes = []
    for steps in (4, 40):
        c = build_trotter_circuit(4, j, TrotterPlan(steps * 0.02, 0.02))
        block = compress(c)
        shapes.append((block.gate_count, [g.pair for g in block.circuit.gates]))
    assert shapes[0][0] == shapes[1][0]
    assert shapes[0][1] == shapes[1][1]


def test_compress_single_axis_classes():
    for j in (CouplingParams(0.9, 0.0, 0.0), CouplingParams(0.0, 0.0, 0.7)):
        c = build_trotter_circuit(3, j, TrotterPlan(0.4, 0.05))
        block = compress(c)
        assert block.gate_count <= max_gate_count(3)
        assert phase_distance(unitary_of(block.circuit), unitary_of(c)) < PHASE_TOL


def test_compress_rejects_three_axis_class():
    c = build_trotter_circuit(3, CouplingParams(1.0, 0.8, 0.6), TrotterPlan(0.1, 0.05))
    with pytest.raises(UnsupportedClassError):
        compress(c)


def test_compress_rejects_mixed_classes():
    gates = (
        PairGate(0, Angles3(0.1, 0.2, 0.0)),
        PairGate(1, Angles3(0.0, 0.2, 0.3)),
    )
    with pytest.raises(UnsupportedClassError):
        compress(Circuit(3, gates))


def test_compress_empty_circuit():
    block = compress(Circuit(3, ()))
    assert block.gate_count == 0


def test_absorb_layer_incremental_matches_compress():
    rng = np.random.default_rng(SEED + 2)
    n = 4
    c = random_xy_layers(rng, n, 6)
    whole = compress(c)
    block = empty_block(n, HamiltonianClass.XY)
    for layer in c.column_gates() if c.columns else []:
        block = absorb_layer(block, layer)
    # fold the same layers by hand
    from spinchain.circuit_ir import columnize

    packed = columnize(c)
    block = empty_block(n, HamiltonianClass.XY)
    for layer in packed.column_gates():
        block = absorb_layer(block, layer)
    assert block.gate_count == whole.gate_count
    assert phase_distance(unitary_of(block.circuit), unitary_of(whole.circuit)) < 1e-9


def test_pad_to_template_reaches_full_size():
    j = CouplingParams(-0.8, -0.2, 0.0)
    for n in (3, 4, 5):
        c = build_trotter_circuit(n, j, TrotterPlan(0.05, 0.05))
        block = compress(c)
        padded = pad_to_template(block)
        assert padded.gate_count == max_gate_count(n)
        assert phase_distance(
            unitary_of(padded.circuit), unitary_of(block.circuit)
        ) < TOL
        # padding is idempotent
        again = pad_to_template(padded)
        assert again.gate_count == padded.gate_count


def test_alternating_layers_bound():
    j = CouplingParams(-0.8, -0.2, 0.0)
    for n in (2, 3, 4, 5, 6):
        c = build_trotter_circuit(n, j, TrotterPlan(0.5, 0.05))
        block = pad_to_template(compress(c))
        assert block.alternating_layers <= n
        assert block.circuit.is_alternating or block.gate_count <= 1


def test_reflect_block_preserves_unitary():
    rng = np.random.default_rng(SEED + 3)
    for n in (3, 4, 5):
        c = random_xy_layers(rng, n, 4)
        block = compress(c)
        mirrored = reflect_block(block)
        assert mirrored.flip != block.flip
        assert phase_distance(
            unitary_of(mirrored.circuit), unitary_of(block.circuit)
        ) < 1e-8
        back = reflect_block(mirrored)
        assert back.flip == block.flip
        assert phase_distance(unitary_of(back.circuit), unitary_of(block.circuit)) < 1e-8


def test_compressed_block_validation():
    block = compress(build_trotter_circuit(3, CouplingParams(0.5, 0.2, 0.0), TrotterPlan(0.1, 0.05)))
    with pytest.raises(ValueError):
        CompressedBlock(
            block.circuit,
            block.klass,
            block.conjugation,
            -1.0,  # negative residual
            block.ybe_moves,
            block.slots,
            block.flip,
        )
    with pytest.raises(ValueError):
        CompressedBlock(
            block.circuit,
            HamiltonianClass.XYZ,
            block.conjugation,
            block.residual,
            block.ybe_moves,
            block.slots,
            block.flip,
        )
