"""Sliding-window compilation with CNOT + teleportation trees.

Each step routes one logical layer with shortest-first paths, then searches
by simulated annealing for tree extensions of those paths: a branch from the
path to a new ancilla patch onto which the control or the target is
teleported during the CNOT.  The extensions are kept only if they strictly
reduce the number of routed layers needed for the next ``k`` logical layers.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from lsmove._kernels import free_distances, free_path
from lsmove.circuit import Gate, LayeredCircuit, push_gate_inplace
from lsmove.router import (
    Route,
    RoutedLayer,
    RouteKind,
    Schedule,
    UnroutableError,
    blocked_mask,
    route_layer,
    window_layer_count,
)
from lsmove.routing_graph import Mapping, RoutingGraph

log = logging.getLogger(__name__)

CONTROL = "control"
TARGET = "target"


@dataclass(frozen=True)
class TreeExtension:
    base_gate_id: int
    attach_vertex: int
    branch: tuple[int, ...]
    new_ancilla: int
    moved: str

    @property
    def kind(self) -> RouteKind:
        return RouteKind.TELEPORT_CONTROL if self.moved == CONTROL else RouteKind.TELEPORT_TARGET


@dataclass
class AnnealConfig:
    k: int = 5
    r: int = 10
    iterations: int = 200
    t0: float = 2.0
    cooling: float = 0.97
    seed: int = 0
    p_extend: float = 0.5
    jump: bool = False
    perturb: str = "all"

    def __post_init__(self):
        if self.k < 1 or self.r < 1:
            raise ValueError("k and r must be at least 1")
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling must lie in (0, 1)")
        if self.t0 <= 0.0:
            raise ValueError("t0 must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if not 0.0 <= self.p_extend <= 1.0:
            raise ValueError("p_extend must lie in [0, 1]")
        if self.perturb not in ("all", "one"):
            raise ValueError("perturb must be 'all' or 'one'")

    @classmethod
    def from_json(cls, path: str | Path) -> AnnealConfig:
        data = json.loads(Path(path).read_text())
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class Candidate:
    extensions: dict[int, TreeExtension | None]
    objective: float = math.inf

    def copy(self) -> Candidate:
        return Candidate(dict(self.extensions), self.objective)

    def active(self) -> list[TreeExtension]:
        return [ext for ext in self.extensions.values() if ext is not None]

    def branch_size(self) -> int:
        return sum(len(ext.branch) for ext in self.active())

    def key(self) -> tuple:
        return tuple(sorted((e.base_gate_id, e.new_ancilla, e.moved) for e in self.active()))


class _LayerContext:
    """Occupancy of one routed layer, shared by all candidate moves."""

    def __init__(self, g: RoutingGraph, m: Mapping, layer: RoutedLayer, gates: dict[int, Gate]):
        self.g = g
        self.m = m
        self.gates = gates
        self.routes = {r.gate: r for r in layer.routes if r.kind is RouteKind.STANDARD_CNOT}
        # data patches and every vertex of every route in the layer
        self.base = blocked_mask(g, m, layer.vertices())

    def mask_for(self, cand: Candidate, skip: int | None = None) -> np.ndarray:
        mask = self.base.copy()
        for gid, ext in cand.extensions.items():
            if ext is not None and gid != skip and ext.branch:
                mask[list(ext.branch)] = 1
        return mask


def _sample_extension(
    ctx: _LayerContext,
    route: Route,
    mask: np.ndarray,
    rng: random.Random,
    center: int,
    radius: int,
) -> TreeExtension | None:
    """Draw a tree extension whose ancilla lies within ``radius`` of ``center``.

    ``mask`` blocks everything the new branch may not touch.  Own path
    interior vertices are valid on-path ancilla positions.
    """
    g = ctx.g
    interior = route.path[1:-1]
    # distances are measured through free space plus the route's own path
    walk = mask.copy()
    walk[list(interior)] = 0
    dist, _ = free_distances(g.indptr, g.indices, walk, center, radius)
    options = np.flatnonzero(dist >= 0)
    options = [int(v) for v in options if (mask[v] == 0 or v in interior) and g.is_open_ancilla[v]]
    if not options:
        return None
    new_ancilla = options[rng.randrange(len(options))]
    moved = CONTROL if rng.random() < 0.5 else TARGET
    if new_ancilla in interior:
        return TreeExtension(route.gate, new_ancilla, (), new_ancilla, moved)
    # the nearest interior vertex seen from the new ancilla has a free branch to it
    walk = mask.copy()
    walk[list(interior)] = 0
    dist, parent = free_distances(g.indptr, g.indices, walk, new_ancilla, -1)
    attach = min(interior, key=lambda v: (dist[v] < 0, dist[v], v))
    if dist[attach] < 0:
        return None
    branch = []
    v = int(parent[attach])
    while v != new_ancilla:
        branch.append(v)
        v = int(parent[v])
    branch.append(new_ancilla)
    return TreeExtension(route.gate, attach, tuple(branch), new_ancilla, moved)


def initial_candidate(
    layer: RoutedLayer,
    g: RoutingGraph,
    m: Mapping,
    rng: random.Random,
    gates: dict[int, Gate] | None = None,
    r: int = 10,
    p_extend: float = 0.5,
    ctx: _LayerContext | None = None,
) -> Candidate:
    """Extend each standard route with probability ``p_extend`` to a random tree."""
    ctx = ctx or _LayerContext(g, m, layer, gates or {})
    cand = Candidate({gid: None for gid in ctx.routes})
    mask = ctx.base.copy()
    for gid, route in ctx.routes.items():
        if rng.random() >= p_extend:
            continue
        attach = route.path[1:-1][rng.randrange(len(route.path) - 2)]
        ext = _sample_extension(ctx, route, mask, rng, attach, r)
        if ext is not None:
            cand.extensions[gid] = ext
            if ext.branch:
                mask[list(ext.branch)] = 1
    return cand


def neighbor(
    cand: Candidate,
    r: int,
    g: RoutingGraph,
    m: Mapping,
    rng: random.Random,
    ctx: _LayerContext,
    retries: int = 8,
) -> Candidate:
    """Re-sample the tree of one uniformly chosen route within radius ``r``."""
    if not cand.extensions:
        return cand.copy()
    gids = sorted(cand.extensions)
    for _ in range(retries):
        gid = gids[rng.randrange(len(gids))]
        ext = _resample(cand, gid, r, rng, ctx)
        if ext is False or ext == cand.extensions[gid]:
            continue
        out = cand.copy()
        out.extensions[gid] = ext
        return out
    return cand.copy()


def perturb_all(cand: Candidate, r: int, rng: random.Random, ctx: _LayerContext) -> Candidate:
    """Re-sample every tree independently with probability one half."""
    out = cand.copy()
    for gid in sorted(cand.extensions):
        if rng.random() < 0.5:
            continue
        ext = _resample(out, gid, r, rng, ctx)
        if ext is not False:
            out.extensions[gid] = ext
    return out


def _resample(cand: Candidate, gid: int, r: int, rng: random.Random, ctx: _LayerContext):
    """New extension for ``gid`` given the other trees of ``cand``; ``False`` if none fits."""
    route = ctx.routes[gid]
    current = cand.extensions[gid]
    # removing the extension is one of the choices
    if current is not None and rng.random() < 1.0 / (r + 1):
        return None
    center = current.new_ancilla if current is not None else route.ancilla
    ext = _sample_extension(ctx, route, ctx.mask_for(cand, skip=gid), rng, center, r)
    return False if ext is None else ext


def apply_extensions(m: Mapping, cand: Candidate, gates: dict[int, Gate]) -> Mapping:
    out = m.copy()
    for ext in cand.active():
        gate = gates[ext.base_gate_id]
        out.teleport(gate.control if ext.moved == CONTROL else gate.target, ext.new_ancilla)
    return out


class _WindowObjective:
    """Routed-layer count of the lookahead window, cached per teleport set."""

    def __init__(self, g: RoutingGraph, m: Mapping, lookahead: Sequence[Sequence[Gate]], gates: dict[int, Gate]):
        self.g = g
        self.m = m
        self.lookahead = [list(layer) for layer in lookahead if layer]
        self.gates = gates
        self.cache: dict[tuple, float] = {}

    def __call__(self, cand: Candidate) -> float:
        key = cand.key()
        if key not in self.cache:
            count = window_layer_count(self.g, apply_extensions(self.m, cand, self.gates), self.lookahead)
            self.cache[key] = math.inf if count is None else float(count)
        return self.cache[key]


def anneal(
    layer: RoutedLayer,
    lookahead: Sequence[Sequence[Gate]],
    cfg: AnnealConfig,
    g: RoutingGraph,
    m: Mapping,
    gates: dict[int, Gate] | None = None,
    rng: random.Random | None = None,
    objective: _WindowObjective | None = None,
) -> Candidate:
    """Metropolis search over tree extensions of ``layer``.

    The objective is the number of routed layers the lookahead needs after
    the candidate's teleports.  Returns the best candidate seen; ties go to
    the candidate with fewer branch vertices.
    """
    rng = rng or random.Random(cfg.seed)
    if gates is None:
        gates = {gate.id: gate for gate in _layer_gates(layer, m)}
    ctx = _LayerContext(g, m, layer, gates)
    objective = objective or _WindowObjective(g, m, lookahead, gates)
    floor = sum(1 for gl in lookahead if gl)

    current = initial_candidate(layer, g, m, rng, gates, cfg.r, cfg.p_extend, ctx=ctx)
    current.objective = objective(current)
    best = current.copy()
    temperature = cfg.t0
    for _ in range(cfg.iterations):
        if best.objective <= floor:
            break
        if cfg.perturb == "all":
            proposal = perturb_all(current, cfg.r, rng, ctx)
        else:
            proposal = neighbor(current, cfg.r, g, m, rng, ctx)
        proposal.objective = objective(proposal)
        delta = proposal.objective - current.objective
        if delta <= 0 or (math.isfinite(delta) and rng.random() < math.exp(-delta / temperature)):
            current = proposal
            if (current.objective, current.branch_size()) < (best.objective, best.branch_size()):
                best = current.copy()
        temperature *= cfg.cooling
    return best


def _layer_gates(layer: RoutedLayer, m: Mapping) -> list[Gate]:
    """Reconstruct gates from route endpoints (used when no gate table is given)."""
    out = []
    for route in layer.routes:
        if route.gate is None:
            continue
        out.append(Gate(route.gate, m.occupant[route.path[0]], m.occupant[route.path[-1]]))
    return out


def idle_restore(
    g: RoutingGraph,
    m: Mapping,
    layer: RoutedLayer,
    busy: set[int] = frozenset(),
    canonical: Sequence[int] | None = None,
) -> list[Route]:
    """Teleport displaced idle qubits back onto free canonical data patches.

    ``busy`` holds the labels operated on in this step; they stay put.
    ``m`` is updated in place for every committed teleport.
    """
    canonical_mask = g.is_canonical_data
    if canonical is not None:
        canonical_mask = np.zeros(g.num_vertices, dtype=np.bool_)
        canonical_mask[list(canonical)] = True
    routes = []
    used = layer.vertices()
    for label in sorted(m.position):
        src = m.position[label]
        if label in busy or canonical_mask[src]:
            continue
        mask = blocked_mask(g, m, used)
        dist, _ = free_distances(g.indptr, g.indices, mask, src, -1)
        # a teleport needs one ancilla in between, so the gap is reached from a reached free vertex
        best = None
        for v in np.flatnonzero(canonical_mask & (mask == 0)):
            v = int(v)
            reach = [dist[u] for u in g.adjacency[v] if u != src and dist[u] >= 1]
            if reach:
                d = min(reach) + 1
                if best is None or (d, v) < best:
                    best = (d, v)
        if best is None:
            continue
        dest = best[1]
        path = free_path(g.indptr, g.indices, mask, src, dest)
        if not len(path):
            continue
        route = Route(None, RouteKind.IDLE_TELEPORT, tuple(path.tolist()), (), int(path[1]))
        routes.append(route)
        used.update(route.vertices)
        m.teleport(label, dest)
    return routes


def unjam(g: RoutingGraph, m: Mapping, gates_now: Sequence[Gate], canonical: Sequence[int]) -> list[Route]:
    """Move one displaced qubit aside so that some gate of ``gates_now`` becomes routable.

    Last resort when neither routing nor :func:`idle_restore` makes progress.
    A qubit parked next to its vacant home has no ancilla in between to
    teleport back through and may wall in other qubits.  Displaced labels are
    tried in ascending order, destinations by distance; ``m`` is updated in
    place and at most one IdleTeleport route is returned.
    """
    home = np.zeros(g.num_vertices, dtype=np.bool_)
    home[list(canonical)] = True
    landing = g.is_open_ancilla | g.is_canonical_data
    mask = blocked_mask(g, m, set())
    for label in sorted(m.position):
        src = m.position[label]
        if home[src]:
            continue
        dist, _ = free_distances(g.indptr, g.indices, mask, src, -1)
        # distance two or more leaves an ancilla between source and destination
        options = sorted((int(dist[v]), int(v)) for v in np.flatnonzero((dist >= 2) & landing))
        for _, dest in options:
            trial = m.copy()
            trial.teleport(label, dest)
            if route_layer(g, trial, list(gates_now))[0].routes:
                path = free_path(g.indptr, g.indices, mask, src, dest)
                m.teleport(label, dest)
                return [Route(None, RouteKind.IDLE_TELEPORT, tuple(path.tolist()), (), int(path[1]))]
    return []


def _tree_route(route: Route, ext: TreeExtension) -> Route:
    return Route(route.gate, ext.kind, route.path, ext.branch, ext.new_ancilla)


def compile_optimized(g: RoutingGraph, m: Mapping, c: LayeredCircuit, cfg: AnnealConfig | None = None) -> Schedule:
    """Sliding-window compilation exploiting teleportations folded into CNOTs.

    Each logical layer is routed shortest-first and then offered to
    :func:`anneal`; when tree extensions strictly cut the routed depth of the
    next ``k`` logical layers, the teleports are applied.  With ``cfg.jump``
    those ``k`` layers are afterwards routed on the new mapping without
    further search, so the next search starts at ``j + k + 1``.  Gates left
    over in any layer are pushed onward exactly as in
    :func:`~lsmove.router.route_static`, and ``cfg.iterations == 0`` turns
    the search off, which reproduces the static schedule.
    """
    cfg = cfg or AnnealConfig()
    missing = [label for label in range(c.q) if label not in m.position]
    if missing:
        raise ValueError(f"labels without a position: {missing[:5]}")
    rng = random.Random(cfg.seed)
    m = m.copy()
    # initial positions count as home so that an untouched mapping never moves
    home = sorted(set(g.canonical_data) | set(m.occupant))
    work = [list(layer) for layer in c.layers]
    gates = {gate.id: gate for layer in work for gate in layer}
    out: list[RoutedLayer] = []
    window_end = -1
    j = 0
    while j < len(work):
        current = work[j]
        if not current:
            j += 1
            continue
        # (i) shortest-first routing, leftovers pushed, idle qubits restored
        routed, leftover = route_layer(g, m, current)
        busy = {qb for gate in current for qb in gate.qubits}
        if j <= window_end:
            # keep the qubits of the committed window where the search put them
            busy |= {qb for layer in work[j + 1 : window_end + 1] for gate in layer for qb in gate.qubits}
        restores = idle_restore(g, m, routed, busy, home)
        if not routed.routes and not restores:
            # an operand may be walled in by displaced qubits that are busy later on
            restores = idle_restore(g, m, routed, canonical=home) or unjam(g, m, current, home)
            if not restores:
                pairs = ", ".join(f"{gt.id}:({gt.control}->{gt.target})" for gt in leftover)
                raise UnroutableError(f"no gate of logical layer {j} can be routed [{pairs}]", leftover)
        routed.routes.extend(restores)
        for gate in leftover:
            push_gate_inplace(work, gate.id, j)

        # (ii) tree search against the next k logical layers
        lookahead = work[j + 1 : j + 1 + cfg.k]
        searchable = any(r.kind is RouteKind.STANDARD_CNOT for r in routed.routes)
        if cfg.iterations and j > window_end and any(lookahead) and searchable:
            objective = _WindowObjective(g, m, [layer for layer in lookahead if layer], gates)
            base = objective(Candidate({r.gate: None for r in routed.routes if r.gate is not None}))
            floor = sum(1 for layer in lookahead if layer)
            if base > floor:
                best = anneal(routed, lookahead, cfg, g, m, gates, rng, objective)
                if best.objective < base:
                    # (iii) commit the trees and the teleports they imply
                    routed = RoutedLayer(
                        [
                            _tree_route(r, best.extensions[r.gate]) if best.extensions.get(r.gate) else r
                            for r in routed.routes
                        ]
                    )
                    m = apply_extensions(m, best, gates)
                    if cfg.jump:
                        window_end = j + len(lookahead)
                    log.debug("layer %d: teleports cut window from %s to %s", j, base, best.objective)
        out.append(routed)
        j += 1
    return Schedule(out, m)
