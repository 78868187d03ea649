"""Exact global minimization of the two-label grid energy via s-t min-cut.

The energy is a sum of per-pixel data costs (one per label) plus a constant
penalty for every 4-adjacent pair of in-domain pixels taking different
labels. That pairwise term is submodular, so the global optimum equals a
minimum s-t cut.

Two stages keep large rasters tractable without giving up exactness:

1. Persistency reduction. A pixel whose data-cost gap exceeds the largest
   possible pairwise influence (4 neighbors x weight) takes the cheaper label
   in every optimal solution, so it is contracted into the matching terminal.
   Only the contested band near the decision boundary enters the graph.
2. Dinic max-flow on the contested subgraph, float64 capacities. Dinic's
   phase bound does not depend on capacity integrality, and every
   augmentation saturates its bottleneck arc exactly (a - a == 0), so the
   algorithm terminates and the reachability cut is deterministic.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _dinic(indptr, heads, caps, rev, s, t):
    """Max flow from s to t; caps is rewritten in place with residuals."""
    n = indptr.size - 1
    level = np.empty(n, np.int64)
    it = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    path_arcs = np.empty(n + 1, np.int64)
    path_nodes = np.empty(n + 2, np.int64)
    total = 0.0
    while True:
        level[:] = -1
        level[s] = 0
        queue[0] = s
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for e in range(indptr[u], indptr[u + 1]):
                v = heads[e]
                if caps[e] > 0.0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            break
        for u in range(n):
            it[u] = indptr[u]
        while True:
            # walk a source->sink path in the level graph
            plen = 0
            path_nodes[0] = s
            u = s
            exhausted = False
            while u != t:
                e = it[u]
                advanced = False
                while e < indptr[u + 1]:
                    v = heads[e]
                    if caps[e] > 0.0 and level[v] == level[u] + 1:
                        advanced = True
                        break
                    e += 1
                it[u] = e
                if advanced:
                    path_arcs[plen] = e
                    plen += 1
                    path_nodes[plen] = v
                    u = v
                else:
                    level[u] = -1
                    if plen == 0:
                        exhausted = True
                        break
                    plen -= 1
                    u = path_nodes[plen]
                    it[u] += 1
            if exhausted:
                break
            bottleneck = caps[path_arcs[0]]
            for i in range(1, plen):
                if caps[path_arcs[i]] < bottleneck:
                    bottleneck = caps[path_arcs[i]]
            for i in range(plen):
                e = path_arcs[i]
                caps[e] -= bottleneck
                caps[rev[e]] += bottleneck
            total += bottleneck
    return total


@njit(cache=True)
def _reachable(indptr, heads, caps, s):
    n = indptr.size - 1
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    seen[s] = True
    queue[0] = s
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = heads[e]
            if caps[e] > 0.0 and not seen[v]:
                seen[v] = True
                queue[qt] = v
                qt += 1
    return seen


def _neighbor_count(mask, of):
    """Per-pixel number of 4-neighbors of `mask` pixels that lie in `of`."""
    count = np.zeros(mask.shape, dtype=np.float64)
    count[:-1, :] += of[1:, :]
    count[1:, :] += of[:-1, :]
    count[:, :-1] += of[:, 1:]
    count[:, 1:] += of[:, :-1]
    count[~mask] = 0.0
    return count


def solve_binary_labeling(domain, cost_a, cost_b, weight):
    """Globally optimal labels for the grid energy; True where label B wins.

    Ties between optimal labelings resolve deterministically (label B on the
    sink side of the canonical cut).
    """
    domain = np.asarray(domain, dtype=bool)
    ca = np.where(domain, cost_a, 0.0).astype(np.float64)
    cb = np.where(domain, cost_b, 0.0).astype(np.float64)
    gap = ca - cb  # positive pulls toward B

    if weight == 0.0:
        return domain & (gap >= 0.0)

    slack = 4.0 * weight
    forced_b = domain & (gap > slack)
    forced_a = domain & (gap < -slack)
    contested = domain & ~forced_a & ~forced_b
    label_b = forced_b.copy()
    n_cont = int(contested.sum())
    if n_cont == 0:
        return label_b

    ids = np.full(domain.shape, -1, dtype=np.int64)
    ids[contested] = np.arange(n_cont)
    s = n_cont
    t = n_cont + 1

    # Terminal capacity per contested pixel: the netted data gap plus the
    # pairwise pull of already-decided neighbors (a forced-A neighbor acts as
    # a source-side arc of capacity `weight`, and symmetrically for forced-B).
    pull = gap[contested]
    pull += weight * (_neighbor_count(contested, forced_b)[contested]
                      - _neighbor_count(contested, forced_a)[contested])

    tails = [np.empty(0, np.int64)]
    heads = [np.empty(0, np.int64)]
    caps = [np.empty(0, np.float64)]

    node = np.arange(n_cont, dtype=np.int64)
    to_b = pull > 0.0
    to_a = pull < 0.0
    # arcs are appended as (forward, reverse) interleaved pairs; the source
    # side of the final cut is label A, so a pull toward B is a sink arc
    if to_b.any():
        u = np.full(int(to_b.sum()), t, dtype=np.int64)
        _interleave(tails, heads, caps, node[to_b], u, pull[to_b])
    if to_a.any():
        u = np.full(int(to_a.sum()), s, dtype=np.int64)
        _interleave(tails, heads, caps, u, node[to_a], -pull[to_a])

    for dy, dx in ((0, 1), (1, 0)):
        a = contested[: contested.shape[0] - dy, : contested.shape[1] - dx]
        b = contested[dy:, dx:]
        pair = a & b
        if not pair.any():
            continue
        ia = ids[: ids.shape[0] - dy, : ids.shape[1] - dx][pair]
        ib = ids[dy:, dx:][pair]
        w = np.full(ia.size, float(weight))
        _interleave(tails, heads, caps, ia, ib, w, w)

    tails = np.concatenate(tails)
    heads = np.concatenate(heads)
    caps = np.concatenate(caps)
    rev = np.arange(tails.size, dtype=np.int64) ^ 1

    order = np.argsort(tails, kind="stable")
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    heads_s = heads[order]
    caps_s = caps[order].copy()
    rev_s = inv[rev[order]]
    indptr = np.zeros(n_cont + 3, dtype=np.int64)
    np.add.at(indptr, tails + 1, 1)
    np.cumsum(indptr, out=indptr)

    _dinic(indptr, heads_s, caps_s, rev_s, s, t)
    side_a = _reachable(indptr, heads_s, caps_s, s)

    label_b[contested] = ~side_a[:n_cont]
    return label_b


def _interleave(tails, heads, caps, u, v, cap_uv, cap_vu=None):
    """Append arcs u->v and their reverses v->u at interleaved indices."""
    if cap_vu is None:
        cap_vu = np.zeros_like(cap_uv)
    n = u.size
    tt = np.empty(2 * n, np.int64)
    hh = np.empty(2 * n, np.int64)
    cc = np.empty(2 * n, np.float64)
    tt[0::2] = u
    tt[1::2] = v
    hh[0::2] = v
    hh[1::2] = u
    cc[0::2] = cap_uv
    cc[1::2] = cap_vu
    tails.append(tt)
    heads.append(hh)
    caps.append(cc)
