"""Independent reference implementations used by the tests."""

from __future__ import annotations

import itertools
import random

import networkx as nx
import numpy as np

from lsmove.circuit import Gate


def csr(n: int, edges) -> tuple[np.ndarray, np.ndarray]:
    adj = [set() for _ in range(n)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, nbrs in enumerate(adj):
        indptr[i + 1] = indptr[i] + len(nbrs)
    indices = np.array([u for nbrs in adj for u in sorted(nbrs)], dtype=np.int64)
    return indptr, indices


def free_subgraph(n: int, edges, blocked: set[int], src: int, dst: int) -> nx.Graph:
    """Graph a route may use: free vertices plus the two endpoints, no direct src-dst hop."""
    keep = {v for v in range(n) if v not in blocked} | {src, dst}
    h = nx.Graph()
    h.add_nodes_from(keep)
    for a, b in edges:
        if a in keep and b in keep and {a, b} != {src, dst}:
            h.add_edge(a, b)
    return h


def bfs_path(n: int, edges, blocked: set[int], src: int, dst: int) -> list[int] | None:
    """Lexicographically smallest shortest path with free interior, by enumeration."""
    h = free_subgraph(n, edges, blocked, src, dst)
    try:
        paths = list(nx.all_shortest_paths(h, src, dst))
    except nx.NetworkXNoPath:
        return None
    return min(paths)


def random_instance(rng: random.Random, max_free: int = 12):
    """Random connected-ish graph with at most ``max_free`` unblocked non-terminal vertices."""
    n = rng.randint(4, 18)
    p = rng.uniform(0.15, 0.6)
    edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]
    src, dst = rng.sample(range(n), 2)
    others = [v for v in range(n) if v not in (src, dst)]
    rng.shuffle(others)
    n_free = rng.randint(0, min(max_free, len(others)))
    blocked = set(others[n_free:])
    return n, edges, blocked, src, dst


def route_layer_reference(adjacency, occupied: set[int], positions: dict[int, int], gates: list[Gate]):
    """Eager shortest-first routing: every step recomputes every remaining path."""
    n = len(adjacency)
    edges = [(a, b) for a in range(n) for b in adjacency[a] if a < b]
    used: set[int] = set()
    remaining = list(gates)
    routed = []
    while True:
        best = None
        for gate in remaining:
            path = bfs_path(n, edges, occupied | used, positions[gate.control], positions[gate.target])
            if path is not None and (best is None or (len(path), gate.id) < (len(best[1]), best[0].id)):
                best = (gate, path)
        if best is None:
            break
        gate, path = best
        routed.append((gate.id, tuple(path)))
        used |= set(path[1:-1])
        remaining.remove(gate)
    return routed, [g.id for g in remaining]
