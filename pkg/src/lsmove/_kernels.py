"""Compiled breadth-first searches over CSR adjacency."""

import numpy as np
from numba import njit


@njit(cache=True)
def free_path(indptr, indices, blocked, src, dst):
    """Lexicographically smallest shortest src -> dst path with free interior.

    ``blocked[v] != 0`` marks vertices that may not be used as interior.
    The endpoints themselves are never inspected.  Paths need at least one
    interior vertex, so a direct src-dst edge does not count.  Returns an
    empty array when no path exists.
    """
    n = blocked.shape[0]
    ws = (np.zeros(n, np.int64), np.zeros(n, np.int64), np.empty(n, np.int64))
    return _free_path(indptr, indices, blocked, src, dst, ws, 1)


@njit(cache=True)
def _free_path(indptr, indices, blocked, src, dst, ws, epoch):
    # ws = (stamp, dist, queue); dist[v] is valid only where stamp[v] == epoch
    stamp, dist, queue = ws
    stamp[dst] = epoch
    dist[dst] = 0
    head = 0
    tail = 0
    for k in range(indptr[dst], indptr[dst + 1]):
        u = indices[k]
        if u != src and blocked[u] == 0:
            stamp[u] = epoch
            dist[u] = 1
            queue[tail] = u
            tail += 1
    length = -1
    while head < tail and length < 0:
        u = queue[head]
        head += 1
        du = dist[u]
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if w == src:
                length = du + 1
                break
            if blocked[w] == 0 and stamp[w] != epoch:
                stamp[w] = epoch
                dist[w] = du + 1
                queue[tail] = w
                tail += 1
    if length < 0:
        return np.empty(0, np.int64)
    path = np.empty(length + 1, np.int64)
    path[0] = src
    cur = src
    for i in range(1, length):
        want = length - i
        best = -1
        for k in range(indptr[cur], indptr[cur + 1]):
            w = indices[k]
            if w != src and w != dst and blocked[w] == 0 and stamp[w] == epoch and dist[w] == want:
                if best < 0 or w < best:
                    best = w
        path[i] = best
        cur = best
    path[length] = dst
    return path


@njit(cache=True)
def free_distances(indptr, indices, blocked, src, radius):
    """Hop distances from ``src`` through unblocked vertices, up to ``radius``.

    Returns ``(dist, parent)``; unreached vertices have ``dist == -1``.
    ``src`` is expanded even when blocked.
    """
    n = blocked.shape[0]
    dist = np.full(n, -1, np.int64)
    parent = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        if radius >= 0 and dist[u] >= radius:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if blocked[w] == 0 and dist[w] < 0:
                dist[w] = dist[u] + 1
                parent[w] = u
                queue[tail] = w
                tail += 1
    return dist, parent


@njit(cache=True)
def _push(layer, qa, qb, g, start):
    """Move gate ``g`` to layer ``start`` and cascade gates sharing a qubit."""
    n = layer.shape[0]
    moving = np.zeros(n, np.bool_)
    moving[g] = True
    j = start
    while True:
        bumped = np.zeros(n, np.bool_)
        any_bumped = False
        for h in range(n):
            if layer[h] != j or moving[h]:
                continue
            for m in range(n):
                if moving[m] and (qa[h] == qa[m] or qa[h] == qb[m] or qb[h] == qa[m] or qb[h] == qb[m]):
                    bumped[h] = True
                    any_bumped = True
                    break
        for m in range(n):
            if moving[m]:
                layer[m] = j
        if not any_bumped:
            return
        moving = bumped
        j += 1


@njit(cache=True)
def window_depth(indptr, indices, blocked, src, dst, qa, qb, gid, layer):
    """Routed-layer count of shortest-first routing with pushing.

    Gate ``i`` runs from vertex ``src[i]`` to ``dst[i]`` on qubits
    ``qa[i], qb[i]`` and starts in logical layer ``layer[i]`` (modified in
    place).  Mirrors ``router.route_layers``; returns -1 when a nonempty
    layer cannot route any gate.
    """
    n = src.shape[0]
    nv = blocked.shape[0]
    ws = (np.zeros(nv, np.int64), np.zeros(nv, np.int64), np.empty(nv, np.int64))
    epoch = 0
    mask = blocked.copy()
    done = np.zeros(n, np.bool_)
    remaining = n
    count = 0
    i = 0
    while remaining > 0:
        members = np.empty(n, np.int64)
        k = 0
        for g in range(n):
            if not done[g] and layer[g] == i:
                members[k] = g
                k += 1
        if k == 0:
            i += 1
            continue
        lengths = np.full(k, -1, np.int64)
        store = [np.empty(0, np.int64) for _ in range(k)]
        for a in range(k):
            epoch += 1
            p = _free_path(indptr, indices, mask, src[members[a]], dst[members[a]], ws, epoch)
            store[a] = p
            lengths[a] = p.shape[0] if p.shape[0] > 0 else -1
        routed = 0
        # stale lengths are lower bounds (blocking only lengthens paths), so a
        # path is refreshed only when it reaches the front of the order
        while True:
            best = -1
            for a in range(k):
                if lengths[a] < 0:
                    continue
                if best < 0 or lengths[a] < lengths[best] or (lengths[a] == lengths[best] and gid[members[a]] < gid[members[best]]):
                    best = a
            if best < 0:
                break
            p = store[best]
            stale = False
            for t in range(1, p.shape[0] - 1):
                if mask[p[t]] != 0:
                    stale = True
                    break
            if stale:
                epoch += 1
                p = _free_path(indptr, indices, mask, src[members[best]], dst[members[best]], ws, epoch)
                store[best] = p
                lengths[best] = p.shape[0] if p.shape[0] > 0 else -1
                continue
            for t in range(1, p.shape[0] - 1):
                mask[p[t]] = 1
            lengths[best] = -2
            done[members[best]] = True
            routed += 1
        # release the layer's route vertices
        for a in range(k):
            if lengths[a] == -2:
                p = store[a]
                for t in range(1, p.shape[0] - 1):
                    mask[p[t]] = blocked[p[t]]
        if routed == 0:
            return -1
        remaining -= routed
        count += 1
        for a in range(k):
            if not done[members[a]]:
                _push(layer, qa, qb, members[a], i + 1)
        i += 1
    return count
