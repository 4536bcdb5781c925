"""Numba kernels for per-machine replica bookkeeping.

``counts[u, i]`` is ``deg_i(u)``, the number of edges of machine ``i``
incident to ``u``; a vertex is on machine ``i`` iff the count is positive.
From the counts we keep per machine: vertex and edge counts, calculation
cost, communication cost, and the replica matrix ``nmat[i, j] = |V_i & V_j|``
(diagonal unused).  Adding or removing an edge updates all of them in
O(p) per endpoint that enters or leaves a machine.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def vertex_machine_counts(src, dst, assign, n, p):
    counts = np.zeros((n, p), dtype=np.int32)
    for e in range(src.shape[0]):
        i = assign[e]
        if i >= 0:
            counts[src[e], i] += 1
            counts[dst[e], i] += 1
    return counts


@numba.njit(cache=True)
def full_costs(counts, ne, c_node, c_edge, c_com):
    """Recompute every per-machine quantity from scratch."""
    n, p = counts.shape
    tcal = np.zeros(p, dtype=c_edge.dtype)
    tcom = np.zeros(p, dtype=c_com.dtype)
    nv = np.zeros(p, dtype=np.int64)
    nmat = np.zeros((p, p), dtype=np.int64)
    hosts = np.empty(p, dtype=np.int64)
    for u in range(n):
        r = 0
        cs = c_com[0] * 0
        for i in range(p):
            if counts[u, i] > 0:
                hosts[r] = i
                r += 1
                cs += c_com[i]
        for a in range(r):
            i = hosts[a]
            nv[i] += 1
            # sum over the other hosts j of (c_i + c_j)
            tcom[i] += (r - 2) * c_com[i] + cs
            for b in range(a + 1, r):
                j = hosts[b]
                nmat[i, j] += 1
                nmat[j, i] += 1
    for i in range(p):
        tcal[i] = c_node[i] * nv[i] + c_edge[i] * ne[i]
    return tcal, tcom, nv, nmat


@numba.njit(cache=True)
def _join(u, k, counts, nv, tcal, tcom, nmat, c_node, c_com):
    p = counts.shape[1]
    for j in range(p):
        if j != k and counts[u, j] > 0:
            tcom[j] += c_com[j] + c_com[k]
            tcom[k] += c_com[k] + c_com[j]
            nmat[j, k] += 1
            nmat[k, j] += 1
    nv[k] += 1
    tcal[k] += c_node[k]


@numba.njit(cache=True)
def _leave(u, k, counts, nv, tcal, tcom, nmat, c_node, c_com):
    p = counts.shape[1]
    for j in range(p):
        if j != k and counts[u, j] > 0:
            tcom[j] -= c_com[j] + c_com[k]
            tcom[k] -= c_com[k] + c_com[j]
            nmat[j, k] -= 1
            nmat[k, j] -= 1
    nv[k] -= 1
    tcal[k] -= c_node[k]


@numba.njit(cache=True)
def add_edge(e, k, src, dst, counts, ne, nv, tcal, tcom, nmat, c_node, c_edge, c_com):
    u = src[e]
    v = dst[e]
    if counts[u, k] == 0:
        _join(u, k, counts, nv, tcal, tcom, nmat, c_node, c_com)
    counts[u, k] += 1
    if counts[v, k] == 0:
        _join(v, k, counts, nv, tcal, tcom, nmat, c_node, c_com)
    counts[v, k] += 1
    ne[k] += 1
    tcal[k] += c_edge[k]


@numba.njit(cache=True)
def remove_edge(e, k, src, dst, counts, ne, nv, tcal, tcom, nmat, c_node, c_edge, c_com):
    u = src[e]
    v = dst[e]
    counts[u, k] -= 1
    if counts[u, k] == 0:
        _leave(u, k, counts, nv, tcal, tcom, nmat, c_node, c_com)
    counts[v, k] -= 1
    if counts[v, k] == 0:
        _leave(v, k, counts, nv, tcal, tcom, nmat, c_node, c_com)
    ne[k] -= 1
    tcal[k] -= c_edge[k]


@numba.njit(cache=True)
def add_edges(edges, machines, src, dst, counts, ne, nv, tcal, tcom, nmat, c_node, c_edge, c_com):
    for t in range(edges.shape[0]):
        add_edge(edges[t], machines[t], src, dst, counts, ne, nv, tcal, tcom, nmat,
                 c_node, c_edge, c_com)


@numba.njit(cache=True)
def remove_edges(edges, machines, src, dst, counts, ne, nv, tcal, tcom, nmat, c_node, c_edge, c_com):
    for t in range(edges.shape[0]):
        remove_edge(edges[t], machines[t], src, dst, counts, ne, nv, tcal, tcom, nmat,
                    c_node, c_edge, c_com)


# candidate tiers for greedy repair
TIER_SHARED = 0   # machines holding both endpoints
TIER_EITHER = 1   # machines holding at least one endpoint
TIER_ANY = 2      # every machine


@numba.njit(cache=True)
def greedy_pick(x, y, tier, counts, ne, nv, tcal, tcom, mem, m_node, m_edge, allowed):
    """Cheapest allowed machine (lowest current T_i, then lowest index) in
    ``tier`` with memory left for edge ``xy``; -1 when none qualifies."""
    p = counts.shape[1]
    best = -1
    for i in range(p):
        if not allowed[i]:
            continue
        hx = counts[x, i] > 0
        hy = counts[y, i] > 0
        if tier == TIER_SHARED and not (hx and hy):
            continue
        if tier == TIER_EITHER and not (hx or hy):
            continue
        extra = 0
        if not hx:
            extra += 1
        if not hy:
            extra += 1
        if m_node * (nv[i] + extra) + m_edge * (ne[i] + 1) > mem[i]:
            continue
        if best < 0 or tcal[i] + tcom[i] < tcal[best] + tcom[best]:
            best = i
    return best


@numba.njit(cache=True)
def repair_edges(edges, src, dst, counts, ne, nv, tcal, tcom, nmat, c_node, c_edge, c_com,
                 mem, m_node, m_edge, allowed, chosen, tiers):
    """Place each edge greedily, trying shared, then either, then any machine
    (only machines flagged in ``allowed`` are considered).

    Returns the number of edges placed; stops at the first edge that fits
    nowhere.
    """
    p = counts.shape[1]
    for t in range(edges.shape[0]):
        e = edges[t]
        x = src[e]
        y = dst[e]
        shared = False
        either = False
        for i in range(p):
            if not allowed[i]:
                continue
            hx = counts[x, i] > 0
            hy = counts[y, i] > 0
            if hx and hy:
                shared = True
            if hx or hy:
                either = True
        j = -1
        tier = -1
        if shared:
            j = greedy_pick(x, y, TIER_SHARED, counts, ne, nv, tcal, tcom, mem, m_node, m_edge,
                            allowed)
            tier = TIER_SHARED
        if j < 0 and either:
            j = greedy_pick(x, y, TIER_EITHER, counts, ne, nv, tcal, tcom, mem, m_node, m_edge,
                            allowed)
            tier = TIER_EITHER
        if j < 0:
            j = greedy_pick(x, y, TIER_ANY, counts, ne, nv, tcal, tcom, mem, m_node, m_edge,
                            allowed)
            tier = TIER_ANY
        if j < 0:
            return t
        chosen[t] = j
        tiers[t] = tier
        add_edge(e, j, src, dst, counts, ne, nv, tcal, tcom, nmat, c_node, c_edge, c_com)
    return edges.shape[0]


class CostArrays:
    """Fleet columns in the dtypes the kernels expect."""

    def __init__(self, f):
        self.p = f.p
        self.c_node = f.column("c_node")
        self.c_edge = f.column("c_edge")
        self.c_com = f.column("c_com")
        self.mem = np.asarray([m.mem for m in f.machines], dtype=np.float64)
        self.m_node = float(f.m_node)
        self.m_edge = float(f.m_edge)
