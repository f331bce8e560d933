from __future__ import annotations

import os
from collections import Counter

import pytest
from hypothesis import HealthCheck, settings

from lsmove.bench import CSV_HEADER
from lsmove.circuit import LayeredCircuit, parse_circuit
from lsmove.router import RouteKind, Schedule
from lsmove.routing_graph import Mapping, RoutingGraph

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CROSSING_SOURCE = "qubits 4\ncnot 2 3\ncnot 0 1\n---\ncnot 0 3\ncnot 2 1\n"
# build_layout("pair", 4, CROSSING_SEED) places labels 0..3 on vertices 7, 8, 21, 22
CROSSING_SEED = 9
CROSSING_POSITIONS = {0: 7, 1: 8, 2: 21, 3: 22}


_CRITERIA: dict[int, tuple[str, bool, str]] = {}
_TABLES: list = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    _CRITERIA[number] = (title, passed, detail)


@pytest.fixture(scope="session")
def table_log() -> list:
    return _TABLES


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA and not _TABLES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        line = f"criterion {number} ({title}): {'PASS' if passed else 'FAIL'}"
        tr.write_line(line + (f" [{detail}]" if detail else ""))
    for title, rows in _TABLES:
        tr.write_line("")
        tr.write_line(title)
        tr.write_line(",".join(CSV_HEADER))
        for row in rows:
            tr.write_line(",".join(row.csv_row()))


@pytest.fixture
def crossing_circuit() -> LayeredCircuit:
    return parse_circuit(CROSSING_SOURCE)


def replay(g: RoutingGraph, m0: Mapping, c: LayeredCircuit, schedule: Schedule) -> list[Mapping]:
    """Replay ``schedule`` and assert every structural invariant along the way.

    Returns the mapping before each routed layer plus the final one.
    """
    gates = {gate.id: gate for gate in c.gates()}
    m = m0.copy()
    history = [m.copy()]
    seen: Counter[int] = Counter()
    last_layer: dict[int, int] = {}
    for i, layer in enumerate(schedule.layers):
        used: set[int] = set()
        moves: list[tuple[int, int]] = []
        for route in layer.routes:
            verts = route.vertices
            assert len(set(verts)) == len(verts), f"layer {i}: route revisits a vertex"
            assert not used & set(verts), f"layer {i}: routes overlap"
            used |= set(verts)
            for a, b in zip(route.path, route.path[1:]):
                assert b in g.adjacency[a]
            interior = list(route.path[1:-1]) + list(route.branch)
            assert interior, f"layer {i}: route without ancilla"
            for v in interior:
                assert v not in m.occupant, f"layer {i}: interior vertex {v} holds data"
            if route.branch:
                chain = list(route.branch)
                assert chain[0] in g.adjacency[route.path[1:-1][0]] or any(
                    chain[0] in g.adjacency[v] for v in route.path[1:-1]
                )
                for a, b in zip(chain, chain[1:]):
                    assert b in g.adjacency[a]
            if route.kind is RouteKind.IDLE_TELEPORT:
                label = m.occupant[route.path[0]]
                assert route.path[-1] not in m.occupant
                moves.append((label, route.path[-1]))
                continue
            gate = gates[route.gate]
            seen[gate.id] += 1
            assert m.position[gate.control] == route.path[0]
            assert m.position[gate.target] == route.path[-1]
            for qb in gate.qubits:
                # same-qubit gates keep their circuit order
                assert last_layer.get(qb, -1) < i
                last_layer[qb] = i
            assert route.ancilla in interior
            if route.kind is RouteKind.TELEPORT_CONTROL:
                moves.append((gate.control, route.ancilla))
            elif route.kind is RouteKind.TELEPORT_TARGET:
                moves.append((gate.target, route.ancilla))
        for label, dest in moves:
            m.teleport(label, dest)
        assert len(m.position) == len(m.occupant) == len(m0)
        assert {m.occupant[v] for v in m.position.values()} == set(m.position)
        history.append(m.copy())
    assert seen == Counter(list(gates)), "gate multiset not conserved"
    assert schedule.depth >= len(c.layers)
    assert schedule.final_mapping.position == m.position
    return history
