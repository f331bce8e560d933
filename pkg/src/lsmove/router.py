"""Shortest-first vertex-disjoint path routing of CNOT layers.

Every CNOT route runs from the control patch to the target patch through
at least one free ancilla patch, which hosts the logical ancilla of the
measurement-based CNOT.  Routes committed to one routed layer share no
vertex.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from lsmove._kernels import free_path, window_depth
from lsmove.circuit import Gate, LayeredCircuit, push_gate_inplace
from lsmove.routing_graph import Mapping, RoutingGraph


class RouteKind(enum.Enum):
    STANDARD_CNOT = "StandardCNOT"
    TELEPORT_CONTROL = "TeleportControl"
    TELEPORT_TARGET = "TeleportTarget"
    IDLE_TELEPORT = "IdleTeleport"


class UnroutableError(RuntimeError):
    """A layer in which no gate can be routed even on an otherwise empty grid."""

    def __init__(self, message: str, gates: Sequence[Gate] = ()):
        super().__init__(message)
        self.gates = list(gates)


@dataclass(frozen=True)
class Route:
    gate: int | None
    kind: RouteKind
    path: tuple[int, ...]
    branch: tuple[int, ...] = ()
    ancilla: int = -1

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.path + self.branch

    def to_json(self) -> dict:
        return {
            "gate": self.gate,
            "kind": self.kind.value,
            "path": list(self.path),
            "branch": list(self.branch),
            "ancilla": self.ancilla,
        }


@dataclass
class RoutedLayer:
    routes: list[Route] = field(default_factory=list)

    def vertices(self) -> set[int]:
        return {v for route in self.routes for v in route.vertices}

    @property
    def gate_ids(self) -> list[int]:
        return [r.gate for r in self.routes if r.gate is not None]

    def to_json(self) -> dict:
        return {"routes": [r.to_json() for r in self.routes]}


@dataclass
class Schedule:
    layers: list[RoutedLayer]
    final_mapping: Mapping

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def stats(self) -> list[int]:
        return [len(layer.gate_ids) for layer in self.layers]

    def to_json(self) -> dict:
        return {
            "layers": [layer.to_json() for layer in self.layers],
            "depth": self.depth,
            "final_mapping": self.final_mapping.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def blocked_mask(g: RoutingGraph, m: Mapping, extra: Iterable[int] = ()) -> np.ndarray:
    """uint8 mask of vertices unusable as route interior: data-occupied plus ``extra``."""
    mask = np.zeros(g.num_vertices, dtype=np.uint8)
    if m.occupant:
        mask[np.fromiter(m.occupant, dtype=np.int64)] = 1
    extra = list(extra)
    if extra:
        mask[extra] = 1
    return mask


def shortest_free_path(
    g: RoutingGraph,
    src: int,
    dst: int,
    blocked: Iterable[int] = (),
    m: Mapping | None = None,
) -> list[int] | None:
    """Minimum-hop path whose interior avoids ``blocked`` and data-occupied vertices.

    Ties are broken toward the lexicographically smallest vertex sequence.
    Returns ``None`` when no path with at least one interior vertex exists.
    """
    for v in (src, dst):
        if v not in g:
            raise KeyError(f"unknown vertex {v}")
    if src == dst:
        raise ValueError("src and dst coincide")
    mask = blocked_mask(g, m or Mapping(), blocked)
    path = free_path(g.indptr, g.indices, mask, src, dst)
    return path.tolist() if len(path) else None


def route_layer(
    g: RoutingGraph,
    m: Mapping,
    gates: Sequence[Gate],
    blocked: Iterable[int] = (),
) -> tuple[RoutedLayer, list[Gate]]:
    """Route as many gates as possible by repeatedly committing the shortest path.

    Returns the routed layer and the gates left over, in input order.
    """
    mask = blocked_mask(g, m, blocked)
    pos = m.position
    indptr, indices = g.indptr, g.indices
    paths: dict[int, np.ndarray] = {}
    by_id = {}
    for gate in gates:
        src, dst = pos[gate.control], pos[gate.target]
        if src == dst:
            raise ValueError(f"gate {gate.id}: endpoints coincide")
        by_id[gate.id] = gate
        path = free_path(indptr, indices, mask, src, dst)
        if len(path):
            paths[gate.id] = path

    routes = []
    while paths:
        gid = min(paths, key=lambda i: (len(paths[i]), i))
        path = paths[gid]
        if mask[path[1:-1]].any():
            # blocking only lengthens paths, so stale lengths are lower bounds
            # and refreshing the front of the order keeps the choice exact
            gate = by_id[gid]
            path = free_path(indptr, indices, mask, pos[gate.control], pos[gate.target])
            if len(path):
                paths[gid] = path
            else:
                del paths[gid]
            continue
        del paths[gid]
        mask[path[1:-1]] = 1
        routes.append(Route(gid, RouteKind.STANDARD_CNOT, tuple(path.tolist()), (), int(path[1])))

    routed = {r.gate for r in routes}
    return RoutedLayer(routes), [gate for gate in gates if gate.id not in routed]


def route_layers(g: RoutingGraph, m: Mapping, layers: Sequence[Sequence[Gate]]) -> list[RoutedLayer]:
    """Route logical layers in order, pushing leftovers into later layers.

    Leftovers of the last layer open new layers, so every gate ends up routed.
    """
    work = [list(layer) for layer in layers]
    out = []
    i = 0
    while i < len(work):
        gates = work[i]
        if not gates:
            i += 1
            continue
        routed, leftover = route_layer(g, m, gates)
        if not routed.routes:
            pairs = ", ".join(f"{gt.id}:({gt.control}->{gt.target})" for gt in leftover)
            raise UnroutableError(f"no gate of logical layer {i} can be routed [{pairs}]", leftover)
        for gate in leftover:
            push_gate_inplace(work, gate.id, i)
        out.append(routed)
        i += 1
    return out


def route_static(g: RoutingGraph, m: Mapping, c: LayeredCircuit) -> Schedule:
    """Baseline compilation with data qubits kept at their initial patches."""
    missing = [label for label in range(c.q) if label not in m.position]
    if missing:
        raise ValueError(f"labels without a position: {missing[:5]}")
    return Schedule(route_layers(g, m, c.layers), m.copy())


def route_window(g: RoutingGraph, m: Mapping, layers: Sequence[Sequence[Gate]]) -> tuple[list[RoutedLayer], int]:
    routed = route_layers(g, m, layers)
    return routed, len(routed)


def window_layer_count(g: RoutingGraph, m: Mapping, layers: Sequence[Sequence[Gate]]) -> int | None:
    """Compiled equivalent of ``len(route_layers(g, m, layers))``; ``None`` if unroutable."""
    gates = [gate for layer in layers for gate in layer]
    if not gates:
        return 0
    pos = m.position
    src = np.fromiter((pos[gt.control] for gt in gates), dtype=np.int64, count=len(gates))
    dst = np.fromiter((pos[gt.target] for gt in gates), dtype=np.int64, count=len(gates))
    qa = np.fromiter((gt.control for gt in gates), dtype=np.int64, count=len(gates))
    qb = np.fromiter((gt.target for gt in gates), dtype=np.int64, count=len(gates))
    gid = np.fromiter((gt.id for gt in gates), dtype=np.int64, count=len(gates))
    index = np.fromiter((i for i, layer in enumerate(layers) for _ in layer), dtype=np.int64, count=len(gates))
    count = window_depth(g.indptr, g.indices, blocked_mask(g, m), src, dst, qa, qb, gid, index)
    return None if count < 0 else int(count)
