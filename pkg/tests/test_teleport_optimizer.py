from __future__ import annotations

import json
import random
from pathlib import Path

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CROSSING_SEED, replay
from lsmove.circuit import Gate, LayeredCircuit, random_circuit
from lsmove.router import RoutedLayer, RouteKind, blocked_mask, route_layer, route_static, window_layer_count
from lsmove.routing_graph import Mapping, RoutingGraph, build_layout
from lsmove.teleport_optimizer import (
    CONTROL,
    TARGET,
    AnnealConfig,
    Candidate,
    _LayerContext,
    anneal,
    apply_extensions,
    compile_optimized,
    idle_restore,
    initial_candidate,
    neighbor,
    perturb_all,
    unjam,
)


def _first_layer(layout="pair", q=20, seed=0, g_per_layer=4):
    g, m = build_layout(layout, q, seed)
    c = random_circuit(q, g_per_layer, 6, seed)
    routed, _ = route_layer(g, m, c.layers[0])
    gates = {gate.id: gate for gate in c.gates()}
    return g, m, c, routed, gates


def test_config_defaults_and_json(tmp_path):
    cfg = AnnealConfig()
    assert (cfg.k, cfg.r, cfg.iterations, cfg.t0, cfg.cooling, cfg.seed) == (5, 10, 200, 2.0, 0.97, 0)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"k": 3, "iterations": 7}))
    loaded = AnnealConfig.from_json(path)
    assert loaded.k == 3 and loaded.iterations == 7 and loaded.r == 10
    assert AnnealConfig(**loaded.to_json()) == loaded
    path.write_text(json.dumps({"temperature": 1}))
    with pytest.raises(ValueError):
        AnnealConfig.from_json(path)


@pytest.mark.parametrize("kw", [{"perturb": "some"}, {"k": 0}, {"r": 0}, {"cooling": 1.0}, {"t0": 0.0}, {"iterations": -1}, {"p_extend": 2.0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        AnnealConfig(**kw)


def test_crossing_window_is_resolved_by_a_tree(crossing_circuit):
    g, m = build_layout("pair", 4, CROSSING_SEED)
    gates = {gate.id: gate for gate in crossing_circuit.gates()}
    routed, left = route_layer(g, m, crossing_circuit.layers[0])
    assert not left
    lookahead = crossing_circuit.layers[1:2]
    assert window_layer_count(g, m, lookahead) == 2
    best = anneal(routed, lookahead, AnnealConfig(k=1, seed=0), g, m, gates)
    assert best.objective == 1
    assert best.active()
    moved = apply_extensions(m, best, gates)
    assert window_layer_count(g, moved, lookahead) == 1


@pytest.mark.parametrize("seed", range(5))
def test_crossing_optimized_depth(crossing_circuit, seed):
    g, m = build_layout("pair", 4, CROSSING_SEED)
    schedule = compile_optimized(g, m, crossing_circuit, AnnealConfig(k=1, seed=seed))
    assert schedule.depth == 2
    kinds = {r.kind for r in schedule.layers[0].routes}
    assert kinds & {RouteKind.TELEPORT_CONTROL, RouteKind.TELEPORT_TARGET}
    replay(g, m, crossing_circuit, schedule)


def test_anneal_zero_iterations_returns_initial():
    g, m, c, routed, gates = _first_layer()
    cfg = AnnealConfig(iterations=0, seed=3)
    best = anneal(routed, c.layers[1:6], cfg, g, m, gates, random.Random(3))
    ctx = _LayerContext(g, m, routed, gates)
    init = initial_candidate(routed, g, m, random.Random(3), gates, cfg.r, cfg.p_extend, ctx)
    assert best.extensions == init.extensions


def test_anneal_at_lower_bound_stays_there():
    g, m = build_layout("single", 4, 0)
    c = LayeredCircuit(4, [[Gate(0, 0, 1)], [Gate(1, 2, 3)]])
    gates = {gate.id: gate for gate in c.gates()}
    routed, _ = route_layer(g, m, c.layers[0])
    best = anneal(routed, c.layers[1:], AnnealConfig(k=1), g, m, gates)
    assert best.objective == 1


def test_initial_candidate_deterministic_and_feasible():
    g, m, c, routed, gates = _first_layer()
    a = initial_candidate(routed, g, m, random.Random(5), gates)
    b = initial_candidate(routed, g, m, random.Random(5), gates)
    assert a.extensions == b.extensions
    used = routed.vertices()
    for ext in a.active():
        assert not used & set(ext.branch)
        used |= set(ext.branch)
        assert ext.new_ancilla not in m.occupant


def test_no_free_space_means_no_extension():
    g, m, c, routed, gates = _first_layer()
    ctx = _LayerContext(g, m, routed, gates)
    ctx.base[:] = 1
    cand = initial_candidate(routed, g, m, random.Random(0), gates, p_extend=1.0, ctx=ctx)
    # only on-path ancilla moves survive when every other vertex is blocked
    for ext in cand.active():
        assert ext.branch == ()
        assert ext.new_ancilla in ctx.routes[ext.base_gate_id].path[1:-1]


def test_both_move_kinds_occur():
    g, m, c, routed, gates = _first_layer(q=40, g_per_layer=6)
    moved = set()
    for seed in range(100):
        cand = initial_candidate(routed, g, m, random.Random(seed), gates)
        moved |= {ext.moved for ext in cand.active()}
    assert moved == {CONTROL, TARGET}


def test_neighbor_respects_radius():
    """BFS oracle: every proposal lies within r of the previous ancilla."""
    g, m, c, routed, gates = _first_layer(q=40, g_per_layer=6, seed=2)
    ctx = _LayerContext(g, m, routed, gates)
    rng = random.Random(0)
    r = 3
    cand = initial_candidate(routed, g, m, rng, gates, r, ctx=ctx)
    h = nx.Graph(g.edges())
    checked = 0
    for _ in range(1000):
        prop = neighbor(cand, r, g, m, rng, ctx)
        for gid, ext in prop.extensions.items():
            before = cand.extensions[gid]
            if ext is None or ext == before:
                continue
            route = ctx.routes[gid]
            center = before.new_ancilla if before else route.ancilla
            walk = ctx.mask_for(cand, skip=gid)
            walk[list(route.path[1:-1])] = 0
            free = [v for v in range(g.num_vertices) if walk[v] == 0] + [center]
            dist = nx.single_source_shortest_path_length(h.subgraph(free), center)
            assert dist[ext.new_ancilla] <= r
            checked += 1
        cand = prop
    assert checked > 100


def test_perturb_all_keeps_trees_disjoint():
    g, m, c, routed, gates = _first_layer(q=40, g_per_layer=8, seed=5)
    ctx = _LayerContext(g, m, routed, gates)
    rng = random.Random(1)
    cand = initial_candidate(routed, g, m, rng, gates, ctx=ctx)
    h = nx.Graph(g.edges())
    changed = 0
    for _ in range(300):
        prop = perturb_all(cand, 4, rng, ctx)
        used = routed.vertices()
        for gid, ext in prop.extensions.items():
            if ext is None:
                continue
            assert not used & set(ext.branch)
            used |= set(ext.branch)
            if ext.branch:
                assert nx.has_path(h.subgraph(list(ext.branch) + [ext.attach_vertex]), ext.attach_vertex, ext.new_ancilla)
        changed += sum(prop.extensions[k] != cand.extensions[k] for k in cand.extensions)
        cand = prop
    assert changed > 300


def test_single_route_moves_also_find_the_crossing_fix(crossing_circuit):
    g, m = build_layout("pair", 4, CROSSING_SEED)
    schedule = compile_optimized(g, m, crossing_circuit, AnnealConfig(k=1, perturb="one"))
    assert schedule.depth == 2


def test_neighbor_without_routes_is_noop():
    g, m = build_layout("pair", 4, 0)
    ctx = _LayerContext(g, m, RoutedLayer(), {})
    cand = Candidate({})
    assert neighbor(cand, 5, g, m, random.Random(0), ctx).extensions == {}


def test_idle_restore_cases():
    g, m = build_layout("pair", 8, 0)
    assert idle_restore(g, m.copy(), RoutedLayer()) == []
    home = m.position[3]
    free = [v for v in range(g.num_vertices) if v not in m.occupant and not g.is_canonical_data[v]]
    displaced = m.copy()
    dest = min(free, key=lambda v: abs(v - home))
    displaced.teleport(3, dest)
    # an operand of the current layer stays put
    assert idle_restore(g, displaced.copy(), RoutedLayer(), busy={3}) == []
    restored = displaced.copy()
    routes = idle_restore(g, restored, RoutedLayer())
    assert len(routes) == 1
    (route,) = routes
    assert route.kind is RouteKind.IDLE_TELEPORT and route.gate is None
    assert route.path[0] == dest
    assert g.is_canonical_data[restored.position[3]]
    assert not set(route.path[1:-1]) & set(displaced.occupant)


def test_iterations_zero_reproduces_static():
    g, m = build_layout("hex", 40, 4)
    c = random_circuit(40, 8, 20, 4)
    static = route_static(g, m, c)
    off = compile_optimized(g, m, c, AnnealConfig(iterations=0))
    assert off.dumps() == static.dumps()


def test_teleports_never_land_in_closed_pockets():
    # a tree once parked a qubit in a margin pocket reachable only through data
    g, m = build_layout("hex", 120, 9)
    c = random_circuit(120, 8, 40, 9)
    schedule = compile_optimized(g, m, c, AnnealConfig(seed=9))
    for layer in schedule.layers:
        for route in layer.routes:
            if route.kind in (RouteKind.TELEPORT_CONTROL, RouteKind.TELEPORT_TARGET):
                assert g.is_open_ancilla[route.ancilla]
    replay(g, m, c, schedule)


def test_unjam_frees_a_walled_in_gate():
    # mapping recorded from an optimized hex run that used to stall
    data = json.loads((Path(__file__).parent / "data" / "jammed_hex.json").read_text())
    g, _ = build_layout(data["layout"], data["q"], data["seed"])
    m = Mapping.from_positions({int(k): v for k, v in data["position"].items()})
    layer = [Gate(*t) for t in data["gates"]]
    routed, _ = route_layer(g, m, layer)
    assert not routed.routes
    assert idle_restore(g, m.copy(), routed, canonical=g.canonical_data) == []
    after = m.copy()
    routes = unjam(g, after, layer, g.canonical_data)
    assert len(routes) == 1
    (route,) = routes
    assert route.kind is RouteKind.IDLE_TELEPORT and len(route.path) >= 3
    assert not set(route.path[1:]) & set(m.occupant)
    assert route_layer(g, after, layer)[0].routes


def test_unjam_without_displaced_qubits_is_empty():
    g, m = build_layout("pair", 8, 0)
    assert unjam(g, m, [Gate(0, 0, 1)], g.canonical_data) == []


def test_user_mapping_off_canonical_is_not_moved():
    g, m = build_layout("single", 6, 0)
    spare = next(v for v in range(g.num_vertices) if v not in m.occupant and not g.is_canonical_data[v] and len(g.adjacency[v]) == 3)
    m.teleport(0, spare)
    c = random_circuit(6, 2, 5, 0)
    assert compile_optimized(g, m, c, AnnealConfig(iterations=0)).dumps() == route_static(g, m, c).dumps()


@pytest.mark.parametrize("jump", [False, True])
def test_optimized_schedule_is_valid(jump):
    g, m = build_layout("triple", 40, 1)
    c = random_circuit(40, 8, 15, 1)
    schedule = compile_optimized(g, m, c, AnnealConfig(iterations=60, jump=jump, seed=1))
    replay(g, m, c, schedule)


def test_optimized_deterministic():
    g, m = build_layout("pair", 40, 2)
    c = random_circuit(40, 8, 12, 2)
    cfg = AnnealConfig(iterations=50, seed=7)
    assert compile_optimized(g, m, c, cfg).dumps() == compile_optimized(g, m, c, cfg).dumps()


def test_optimized_does_not_mutate_inputs():
    g, m = build_layout("pair", 20, 2)
    c = random_circuit(20, 4, 8, 2)
    before_m, before_c = m.copy(), c.copy()
    compile_optimized(g, m, c, AnnealConfig(iterations=30))
    assert m == before_m and c == before_c


@given(st.integers(0, 2**31), st.sampled_from(["single", "pair", "triple", "hex"]), st.integers(1, 6))
def test_optimized_invariants(seed, layout, g_per_layer):
    q = 24
    g, m = build_layout(layout, q, seed)
    c = random_circuit(q, g_per_layer, 8, seed)
    schedule = compile_optimized(g, m, c, AnnealConfig(iterations=25, seed=seed))
    replay(g, m, c, schedule)


def test_blocked_mask_counts_layer_vertices():
    g, m, c, routed, gates = _first_layer()
    ctx = _LayerContext(g, m, routed, gates)
    assert (ctx.base == blocked_mask(g, m, routed.vertices())).all()
