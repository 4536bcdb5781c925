"""Hash baselines and conversion of an edge partition to a vertex partition."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from . import state as st_
from .capacity import CapacityPlan, check_plan
from .errors import InfeasibleError, ValidationError
from .metrics import Partitioning

KINDS = ("hash", "degree-hash")

_MASK = (1 << 64) - 1
# a hash pass can paint itself into a corner when memory is tight; it is
# then rerun with a derived seed
MAX_ATTEMPTS = 32


@numba.njit(cache=True)
def _mix(seed, key):
    # splitmix64 finaliser; uint64 arithmetic wraps
    z = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(key) + np.uint64(0x632BE59BD9B4E5B)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _fits(x, y, i, counts, nv, ne, mem, m_node, m_edge):
    extra = 0
    if counts[x, i] == 0:
        extra += 1
    if counts[y, i] == 0:
        extra += 1
    return m_node * (nv[i] + extra) + m_edge * (ne[i] + 1) <= mem[i]


@numba.njit(cache=True)
def _hash_partition(src, dst, keys, n, deltas, static, seed, mem, m_node, m_edge):
    m = src.shape[0]
    p = deltas.shape[0]
    counts = np.zeros((n, p), dtype=np.int32)
    nv = np.zeros(p, dtype=np.int64)
    ne = np.zeros(p, dtype=np.int64)
    assign = np.full(m, -1, dtype=np.int32)
    w = np.zeros(p, dtype=np.float64)
    for e in range(m):
        x = src[e]
        y = dst[e]
        u = _mix(seed, keys[e])
        total = 0.0
        for i in range(p):
            w[i] = 0.0
            if ne[i] < deltas[i] and _fits(x, y, i, counts, nv, ne, mem, m_node, m_edge):
                w[i] = deltas[i] if static else deltas[i] - ne[i]
                total += w[i]
        j = -1
        if total > 0:
            target = u * total
            acc = 0.0
            for i in range(p):
                if w[i] > 0:
                    j = i
                    acc += w[i]
                    if target < acc:
                        break
        else:
            # every machine is at budget: any machine with memory left
            for i in range(p):
                if _fits(x, y, i, counts, nv, ne, mem, m_node, m_edge):
                    w[i] = 1.0
                    total += 1.0
            if total == 0:
                return assign, e
            target = u * total
            acc = 0.0
            for i in range(p):
                if w[i] > 0:
                    j = i
                    acc += w[i]
                    if target < acc:
                        break
        if counts[x, j] == 0:
            nv[j] += 1
        counts[x, j] += 1
        if counts[y, j] == 0:
            nv[j] += 1
        counts[y, j] += 1
        ne[j] += 1
        assign[e] = j
    return assign, m


def _run(g, f, plan, seed, keys, static):
    check_plan(plan, g.num_edges)
    if plan.p != f.p:
        raise ValidationError("plan and fleet disagree on the machine count")
    c = st_.CostArrays(f)
    deltas = np.asarray(plan.deltas, dtype=np.int64)
    for attempt in range(MAX_ATTEMPTS):
        s = (int(seed) + attempt * 0x5851F42D4C957F2D) & _MASK
        assign, stop = _hash_partition(g.src, g.dst, keys, g.num_vertices, deltas, static,
                                       np.uint64(s), c.mem, c.m_node, c.m_edge)
        if stop == g.num_edges:
            break
    else:
        raise InfeasibleError(
            f"edge ({g.label(g.src[stop])}, {g.label(g.dst[stop])}) fits on no machine"
        )
    return Partitioning.from_assign(assign, f.p)


def partition_hash(g, f, plan: CapacityPlan, seed=0) -> Partitioning:
    """Seeded hash of the edge id, machines weighted by remaining budget."""
    return _run(g, f, plan, seed, np.arange(g.num_edges, dtype=np.int64), False)


def degree_keys(g) -> np.ndarray:
    """Lower-degree endpoint of each edge (lower id on ties)."""
    deg = g.degree
    ds, dd = deg[g.src], deg[g.dst]
    return np.where(dd < ds, g.dst, g.src).astype(np.int64)


def partition_degree_hash(g, f, plan: CapacityPlan, seed=0) -> Partitioning:
    """Hash of the lower-degree endpoint, so a low-degree vertex keeps its
    edges together.  Machines are weighted by their fixed budget; a full
    machine drops out and its keys spread over the rest."""
    return _run(g, f, plan, seed, degree_keys(g), True)


@dataclass
class VertexPartition:
    vertex_machine: np.ndarray   # 0-based machine per vertex, -1 for isolated vertices
    edge_machines: np.ndarray    # (m, 2) machines of each edge's endpoints
    cut_edges: int
    memory_exceeded: bool        # with cut edges stored on both sides

    def vertex_sets(self, p: int) -> list[list[int]]:
        return [np.flatnonzero(self.vertex_machine == i).tolist() for i in range(p)]


def to_vertex_partition(pt: Partitioning, f, g) -> VertexPartition:
    """Move every vertex to the machine holding the largest share of its
    edges, i.e. the largest ``deg_k(u) / (deg(u) + 1)``.

    Vertices are visited by descending degree (lower id first).  A machine
    is full when the vertex and its edges to vertices already placed there
    would exceed its memory; the next best share is tried then.
    """
    counts = pt.counts(g)
    deg = g.degree
    n, p = g.num_vertices, f.p
    mem = [m.mem for m in f.machines]
    used = [0] * p
    vm = np.full(n, -1, dtype=np.int64)
    order = sorted(range(n), key=lambda u: (-int(deg[u]), u))
    for u in order:
        if deg[u] == 0:
            continue
        lo, hi = g.offsets[u], g.offsets[u + 1]
        nb = vm[g.neighbors[lo:hi]]
        ranked = sorted(range(p), key=lambda k: (-int(counts[u, k]), k))
        for k in ranked:
            need = f.m_node + f.m_edge * int(np.count_nonzero(nb == k))
            if used[k] + need <= mem[k]:
                used[k] += need
                vm[u] = k
                break
        else:
            raise InfeasibleError(f"no machine has room for vertex {g.label(u)}")
    em = np.column_stack([vm[g.src], vm[g.dst]])
    cut = em[:, 0] != em[:, 1]
    load = np.zeros(p)
    np.add.at(load, vm[vm >= 0], f.m_node)
    np.add.at(load, em[:, 0], f.m_edge)
    np.add.at(load, em[cut, 1], f.m_edge)
    exceeded = bool(np.any(load > np.asarray(mem, dtype=float)))
    return VertexPartition(vm, em, int(cut.sum()), exceeded)
