from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CROSSING_SOURCE
from lsmove.circuit import (
    CircuitError,
    Gate,
    LayeredCircuit,
    asap_layers,
    logical_depth,
    parse_circuit,
    push_gate,
    random_circuit,
    serialize_circuit,
)


def _pairs(layer):
    return [(g.control, g.target) for g in layer]


def test_random_circuit_shape():
    c = random_circuit(120, 8, 40, seed=3)
    assert logical_depth(c) == 40
    assert c.total_gates == 320
    c.validate()


def test_random_circuit_forced_support():
    c = random_circuit(2, 1, 1, seed=5)
    assert len(c.layers) == 1
    assert {c.layers[0][0].control, c.layers[0][0].target} == {0, 1}


def test_random_circuit_gate_count_sweep():
    assert random_circuit(60, 5, 100, seed=0).total_gates == 500
    assert logical_depth(random_circuit(120, 8, 320, seed=0)) == 320


def test_random_circuit_errors():
    with pytest.raises(ValueError):
        random_circuit(5, 3, 2)


@pytest.mark.parametrize("dependent", [True, False])
def test_random_circuit_determinism(dependent):
    a = random_circuit(30, 4, 12, seed=9, dependent=dependent)
    b = random_circuit(30, 4, 12, seed=9, dependent=dependent)
    assert a == b
    assert a != random_circuit(30, 4, 12, seed=10, dependent=dependent)


@given(st.integers(4, 40), st.integers(1, 20), st.integers(0, 2**31))
def test_dependent_layers_are_asap(q, d_L, seed):
    """Chained layers coincide with the as-soon-as-possible layering."""
    g = max(1, q // 4)
    c = random_circuit(q, g, d_L, seed)
    relayered = asap_layers(c.gates())
    assert [_pairs(x) for x in relayered] == [_pairs(x) for x in c.layers]


def test_independent_layers_are_uniform_pairs():
    c = random_circuit(10, 5, 200, seed=1, dependent=False)
    for layer in c.layers:
        assert sorted(q for gate in layer for q in gate.qubits) == list(range(10))
    counts = {}
    for gate in c.gates():
        counts[gate.qubits] = counts.get(gate.qubits, 0) + 1
    # every ordered pair appears, none dominates
    assert len(counts) == 90
    assert max(counts.values()) < 4 * min(counts.values()) + 10


def test_parse_asap():
    assert logical_depth(parse_circuit("qubits 2\ncnot 0 1\ncnot 0 1")) == 2
    assert logical_depth(parse_circuit("qubits 4\ncnot 0 1\ncnot 2 3")) == 1


def test_parse_crossing_example():
    c = parse_circuit(CROSSING_SOURCE)
    assert [_pairs(layer) for layer in c.layers] == [[(2, 3), (0, 1)], [(0, 3), (2, 1)]]
    assert logical_depth(c) == 2


def test_parse_explicit_layers_override_asap():
    c = parse_circuit("qubits 4\ncnot 0 1\n---\ncnot 2 3\n")
    assert logical_depth(c) == 2


@pytest.mark.parametrize(
    "text",
    [
        "cnot 0 1",
        "qubits 2\ncnot 0 2",
        "qubits 2\ncnot 1 1",
        "qubits 2\ntoffoli 0 1 2",
        "qubits 3\ncnot 0 1\ncnot 1 2\n---\n",
        "qubits x",
    ],
)
def test_parse_errors(text):
    with pytest.raises(CircuitError):
        parse_circuit(text)


def test_serialize_roundtrip():
    c = random_circuit(20, 4, 6, seed=2)
    assert parse_circuit(serialize_circuit(c)) == c


def test_empty_circuit_depth():
    assert logical_depth(LayeredCircuit(3)) == 0


def test_push_cascade():
    c = LayeredCircuit(3, [[Gate(0, 0, 1)], [Gate(1, 1, 2)]])
    out = push_gate(c, 0, 0)
    assert [_pairs(x) for x in out.layers] == [[], [(0, 1)], [(1, 2)]]


def test_push_without_cascade():
    c = LayeredCircuit(4, [[Gate(0, 0, 1)], [Gate(1, 2, 3)]])
    out = push_gate(c, 0, 0)
    assert [_pairs(x) for x in out.layers] == [[], [(2, 3), (0, 1)]]
    assert c.layers[0]  # input untouched


def test_push_missing_gate():
    with pytest.raises(KeyError):
        push_gate(LayeredCircuit(2, [[Gate(0, 0, 1)]]), 7, 0)


def _order_by_qubit(layers):
    out = {}
    for layer in layers:
        for gate in layer:
            for qb in gate.qubits:
                out.setdefault(qb, []).append(gate.id)
    return out


@given(st.integers(0, 2**31), st.integers(1, 25))
def test_push_preserves_dependency_order(seed, pushes):
    """Oracle: per-qubit gate sequences equal the original topological order."""
    rng = random.Random(seed)
    c = random_circuit(12, 3, 6, seed, dependent=rng.random() < 0.5)
    reference = _order_by_qubit(c.layers)
    for _ in range(pushes):
        nonempty = [i for i, layer in enumerate(c.layers) if layer]
        i = rng.choice(nonempty)
        c = push_gate(c, rng.choice(c.layers[i]).id, i)
        c.validate()
        assert _order_by_qubit(c.layers) == reference
    assert sorted(g.id for g in c.gates()) == list(range(18))
