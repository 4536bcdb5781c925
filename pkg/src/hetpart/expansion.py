"""Best-first partition expansion.

Partitions are grown one machine at a time over the graph of edges no
earlier partition has taken.  The current partition keeps a core set C
(vertices whose unassigned edges have all been taken) and a boundary set S
(vertices covered by the partition's edges).  The next vertex to expand is
the one in S minus C with the smallest priority

    w(v) = (1 + alpha) * |N(v) \\ S| - (alpha + beta * [v in B]) * |N(v)|

where N(v) is v's neighbourhood in that remaining graph (fixed when the
partition starts) and B collects vertices left on the boundary of earlier
partitions.  For a boundary vertex ``|N(v) \\ S|`` is its count of edges
still unassigned, since an unassigned edge between two boundary vertices is
always taken on the spot.  When S minus C is empty the expansion restarts
from the lowest-degree vertex outside every core that still has unassigned
edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from . import state as st_
from .capacity import CapacityPlan, check_plan
from .errors import InfeasibleError, ValidationError
from .metrics import Partitioning

CONTINUE, BUDGET_REACHED, MEMORY_FULL = 0, 1, 2

# slots of the scalar array shared with the kernels
S_LEN, OUT_LEN, NV, NE, HEAP, PTR, PTR2, REMAINING = range(8)


def priority(v, S, B, alpha, beta, g, remaining=None) -> float:
    """Expansion priority of ``v`` (smaller is expanded first).

    ``S`` and ``B`` are vertex collections supporting ``in``.  ``remaining``
    is an optional boolean edge mask; when given, neighbourhoods are taken
    in the graph of those edges only.
    """
    lo, hi = g.offsets[v], g.offsets[v + 1]
    outside = size = 0
    for k in range(lo, hi):
        if remaining is not None and not remaining[g.edge_ids[k]]:
            continue
        size += 1
        if int(g.neighbors[k]) not in S:
            outside += 1
    border = 1.0 if v in B else 0.0
    return (1.0 + alpha) * outside - (alpha + beta * border) * size


@numba.njit(cache=True)
def _less(k1, v1, k2, v2):
    return k1 < k2 or (k1 == k2 and v1 < v2)


@numba.njit(cache=True)
def _heap_sift_down(hk, hv, hr, i, size):
    k, v, r = hk[i], hv[i], hr[i]
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and _less(hk[c + 1], hv[c + 1], hk[c], hv[c]):
            c += 1
        if _less(hk[c], hv[c], k, v):
            hk[i], hv[i], hr[i] = hk[c], hv[c], hr[c]
            i = c
        else:
            break
    hk[i], hv[i], hr[i] = k, v, r


@numba.njit(cache=True)
def _heap_compact(hk, hv, hr, size, in_S, in_C, rem_deg):
    # drop stale entries, then heapify bottom-up
    w = 0
    for t in range(size):
        v = hv[t]
        if in_S[v] and not in_C[v] and hr[t] == rem_deg[v]:
            hk[w], hv[w], hr[w] = hk[t], hv[t], hr[t]
            w += 1
    for i in range(w // 2 - 1, -1, -1):
        _heap_sift_down(hk, hv, hr, i, w)
    return w


@numba.njit(cache=True)
def _heap_push(hk, hv, hr, st, v, key, r, in_S, in_C, rem_deg):
    if st[HEAP] == hk.shape[0]:
        st[HEAP] = _heap_compact(hk, hv, hr, st[HEAP], in_S, in_C, rem_deg)
    i = st[HEAP]
    st[HEAP] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(key, v, hk[parent], hv[parent]):
            hk[i], hv[i], hr[i] = hk[parent], hv[parent], hr[parent]
            i = parent
        else:
            break
    hk[i], hv[i], hr[i] = key, v, r


@numba.njit(cache=True)
def _push(v, deg, border, rem_deg, alpha, beta, hk, hv, hr, st, in_S, in_C):
    key = (1.0 + alpha) * rem_deg[v] - (alpha + beta * border[v]) * deg[v]
    _heap_push(hk, hv, hr, st, v, key, rem_deg[v], in_S, in_C, rem_deg)


@numba.njit(cache=True)
def _pop_valid(hk, hv, hr, st, in_S, in_C, rem_deg):
    while st[HEAP] > 0:
        v, r = hv[0], hr[0]
        st[HEAP] -= 1
        last = st[HEAP]
        if last > 0:
            hk[0], hv[0], hr[0] = hk[last], hv[last], hr[last]
            _heap_sift_down(hk, hv, hr, 0, last)
        if in_S[v] and not in_C[v] and r == rem_deg[v]:
            return v
    return -1


@numba.njit(cache=True)
def _restart(by_degree, rem_deg, core_global, st):
    n = by_degree.shape[0]
    while st[PTR] < n:
        v = by_degree[st[PTR]]
        if rem_deg[v] > 0 and not core_global[v]:
            return v
        st[PTR] += 1
    # every candidate is in some core: fall back to any vertex with work left
    while st[PTR2] < n:
        v = by_degree[st[PTR2]]
        if rem_deg[v] > 0:
            return v
        st[PTR2] += 1
    return -1


@numba.njit(cache=True)
def _take(e, a, b, remaining, rem_deg, has_edge, out, st, mem_cap, m_node, m_edge):
    extra = 0
    if not has_edge[a]:
        extra += 1
    if not has_edge[b]:
        extra += 1
    if m_node * (st[NV] + extra) + m_edge * (st[NE] + 1) > mem_cap:
        return False
    remaining[e] = 0
    rem_deg[a] -= 1
    rem_deg[b] -= 1
    has_edge[a] = 1
    has_edge[b] = 1
    st[NV] += extra
    st[NE] += 1
    st[REMAINING] -= 1
    out[st[OUT_LEN]] = e
    st[OUT_LEN] += 1
    return True


@numba.njit(cache=True)
def _alloc(x, offsets, nbrs, eids, part_deg, remaining, rem_deg, in_S, in_C, has_edge,
           core_global, border, s_list, out, hk, hv, hr, st, budget, mem_cap,
           m_node, m_edge, alpha, beta):
    in_C[x] = 1
    core_global[x] = 1
    if not in_S[x]:
        in_S[x] = 1
        s_list[st[S_LEN]] = x
        st[S_LEN] += 1
    for k in range(offsets[x], offsets[x + 1]):
        e = eids[k]
        if not remaining[e]:
            continue
        y = nbrs[k]
        if in_S[y]:
            # only reachable through the step-wise API on hand-built states
            if not _take(e, x, y, remaining, rem_deg, has_edge, out, st, mem_cap, m_node, m_edge):
                return MEMORY_FULL
            if not in_C[y]:
                _push(y, part_deg, border, rem_deg, alpha, beta, hk, hv, hr, st, in_S, in_C)
            if st[NE] >= budget:
                return BUDGET_REACHED
            continue
        in_S[y] = 1
        s_list[st[S_LEN]] = y
        st[S_LEN] += 1
        for k2 in range(offsets[y], offsets[y + 1]):
            e2 = eids[k2]
            if not remaining[e2]:
                continue
            z = nbrs[k2]
            if not in_S[z]:
                continue
            if not _take(e2, y, z, remaining, rem_deg, has_edge, out, st, mem_cap, m_node, m_edge):
                if not has_edge[y]:
                    in_S[y] = 0
                    st[S_LEN] -= 1
                return MEMORY_FULL
            if not in_C[z]:
                _push(z, part_deg, border, rem_deg, alpha, beta, hk, hv, hr, st, in_S, in_C)
            if st[NE] >= budget:
                return BUDGET_REACHED
        _push(y, part_deg, border, rem_deg, alpha, beta, hk, hv, hr, st, in_S, in_C)
    return CONTINUE


@numba.njit(cache=True)
def _expand(offsets, nbrs, eids, part_deg, remaining, rem_deg, in_S, in_C, has_edge,
            core_global, border, by_degree, s_list, out, hk, hv, hr, st, budget,
            mem_cap, m_node, m_edge, alpha, beta):
    status = CONTINUE
    while st[NE] < budget and st[REMAINING] > 0:
        x = _pop_valid(hk, hv, hr, st, in_S, in_C, rem_deg)
        if x < 0:
            x = _restart(by_degree, rem_deg, core_global, st)
            if x < 0:
                break
        status = _alloc(x, offsets, nbrs, eids, part_deg, remaining, rem_deg, in_S, in_C,
                        has_edge, core_global, border, s_list, out, hk, hv, hr, st,
                        budget, mem_cap, m_node, m_edge, alpha, beta)
        if status != CONTINUE:
            break
    return status


@numba.njit(cache=True)
def _finish(in_S, in_C, has_edge, border, s_list, st):
    for t in range(st[S_LEN]):
        v = s_list[t]
        if not in_C[v]:
            border[v] = 1
        in_S[v] = 0
        in_C[v] = 0
        has_edge[v] = 0
    st[S_LEN] = 0
    st[NV] = 0
    st[NE] = 0
    st[HEAP] = 0


@dataclass
class PartitionState:
    """Snapshot of one partition under construction."""

    core: np.ndarray        # bool per vertex (C)
    boundary: np.ndarray    # bool per vertex (S)
    edges: np.ndarray       # edge ids in allocation order
    num_vertices: int       # vertices incident to the partition's edges
    truncated: bool = False
    memory_full: bool = False

    @property
    def num_edges(self) -> int:
        return len(self.edges)


class ExpansionContext:
    """Unassigned-edge pool, border set and scratch space for expansion.

    ``edges`` restricts the pool to a subset of edge ids (default: all);
    ``border`` seeds the border set B.
    """

    def __init__(self, g, edges=None, border=None, alpha=0.3, beta=0.3):
        if not (0 <= alpha <= 1 and 0 <= beta <= 1):
            raise ValidationError("alpha and beta must lie in [0, 1]")
        n, m = g.num_vertices, g.num_edges
        self.g = g
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.deg = np.diff(g.offsets)
        if edges is None:
            self.remaining = np.ones(m, dtype=np.uint8)
            self.rem_deg = self.deg.astype(np.int64)
            self.by_degree = np.argsort(self.deg, kind="stable")
            pool = m
        else:
            edges = np.asarray(edges, dtype=np.int64)
            self.remaining = np.zeros(m, dtype=np.uint8)
            self.remaining[edges] = 1
            self.rem_deg = (np.bincount(g.src[edges], minlength=n)
                            + np.bincount(g.dst[edges], minlength=n)).astype(np.int64)
            cand = np.flatnonzero(self.rem_deg)
            self.by_degree = cand[np.argsort(self.deg[cand], kind="stable")]
            pool = len(edges)
        # neighbourhood sizes in the remaining graph as of the current
        # partition's start
        self.part_deg = self.rem_deg.copy()
        self.in_S = np.zeros(n, dtype=np.uint8)
        self.in_C = np.zeros(n, dtype=np.uint8)
        self.has_edge = np.zeros(n, dtype=np.uint8)
        self.core_global = np.zeros(n, dtype=np.uint8)
        self.border = np.zeros(n, dtype=np.uint8)
        if border is not None:
            self.border[np.asarray(border, dtype=bool)] = 1
        self.s_list = np.empty(n, dtype=np.int64)
        self.out = np.empty(pool, dtype=np.int64)
        cap = 2 * n + 16
        self.hk = np.empty(cap, dtype=np.float64)
        self.hv = np.empty(cap, dtype=np.int64)
        self.hr = np.empty(cap, dtype=np.int64)
        self.st = np.zeros(8, dtype=np.int64)
        self.st[REMAINING] = pool
        self._start = 0

    @property
    def remaining_count(self) -> int:
        return int(self.st[REMAINING])

    def remaining_edges(self) -> np.ndarray:
        return np.flatnonzero(self.remaining)

    def restart_vertex(self) -> int | None:
        """Lowest-degree vertex (then lowest id) outside every core that
        still has unassigned edges; ``None`` when the pool is exhausted."""
        v = _restart(self.by_degree, self.rem_deg, self.core_global, self.st)
        return None if v < 0 else int(v)

    def alloc_edges(self, x: int, budget: int, mem_cap=np.inf, m_node=0.0, m_edge=0.0) -> int:
        """Promote ``x`` to the core and take edges around it (one step)."""
        if self.in_C[x]:
            raise ValidationError(f"vertex {x} is already in the core")
        return int(_alloc(x, self.g.offsets, self.g.neighbors, self.g.edge_ids, self.part_deg,
                          self.remaining, self.rem_deg, self.in_S, self.in_C, self.has_edge,
                          self.core_global, self.border, self.s_list, self.out, self.hk,
                          self.hv, self.hr, self.st, budget, float(mem_cap), float(m_node),
                          float(m_edge), self.alpha, self.beta))

    def expand(self, budget: int, mem_cap=np.inf, m_node=0.0, m_edge=0.0) -> int:
        """Grow the current partition until it holds ``budget`` edges, the
        pool runs dry, or memory would overflow; returns a status code."""
        return int(_expand(self.g.offsets, self.g.neighbors, self.g.edge_ids, self.part_deg,
                           self.remaining, self.rem_deg, self.in_S, self.in_C, self.has_edge,
                           self.core_global, self.border, self.by_degree, self.s_list,
                           self.out, self.hk, self.hv, self.hr, self.st, budget,
                           float(mem_cap), float(m_node), float(m_edge), self.alpha,
                           self.beta))

    def state(self, status=CONTINUE, budget=None) -> PartitionState:
        n = self.g.num_vertices
        members = self.s_list[: self.st[S_LEN]]
        core = np.zeros(n, dtype=bool)
        core[members[self.in_C[members] == 1]] = True
        boundary = np.zeros(n, dtype=bool)
        boundary[members] = True
        edges = self.out[self._start: self.st[OUT_LEN]].copy()
        truncated = budget is not None and len(edges) < budget and status != MEMORY_FULL
        return PartitionState(core, boundary, edges, int(self.st[NV]), truncated,
                              status == MEMORY_FULL)

    def finish(self) -> np.ndarray:
        """Close the current partition: its open boundary joins B."""
        edges = self.out[self._start: self.st[OUT_LEN]].copy()
        _finish(self.in_S, self.in_C, self.has_edge, self.border, self.s_list, self.st)
        self._start = int(self.st[OUT_LEN])
        np.copyto(self.part_deg, self.rem_deg)
        return edges


def expand_partition(ctx: ExpansionContext, delta: int, mem_cap=np.inf, m_node=0.0,
                     m_edge=0.0) -> PartitionState:
    """Build one partition of ``delta`` edges from the pool held by ``ctx``."""
    if delta < 1:
        raise ValidationError("budget must be >= 1")
    status = ctx.expand(delta, mem_cap, m_node, m_edge)
    snap = ctx.state(status, delta)
    ctx.finish()
    return snap


def grow_machines(ctx: ExpansionContext, machines, budgets, costs) -> dict:
    """Expand one partition per machine, in the given order.

    Budget a machine could not use (memory ran out) carries over to the
    next machine; the last machine takes whatever is left in the pool.
    Returns ``{machine: edge ids in allocation order}``.
    """
    result = {}
    carry = 0
    for idx, i in enumerate(machines):
        last = idx == len(machines) - 1
        budget = ctx.remaining_count if last else int(budgets[i]) + carry
        if budget <= 0 or ctx.remaining_count == 0:
            result[i] = np.empty(0, dtype=np.int64)
            carry = max(budget, 0)
            continue
        ctx.expand(budget, costs.mem[i], costs.m_node, costs.m_edge)
        edges = ctx.finish()
        result[i] = edges
        carry = budget - len(edges)
    return result


def processing_order(deltas) -> list[int]:
    """Machines by descending budget, ties by lower index."""
    return sorted(range(len(deltas)), key=lambda i: (-deltas[i], i))


def spill(g, f, order, leftover, costs=None):
    """Place edges no expansion could hold with the greedy repair rule."""
    costs = costs or st_.CostArrays(f)
    p = f.p
    assign = np.full(g.num_edges, -1, dtype=np.int32)
    for i, o in enumerate(order):
        assign[o] = i
    counts = st_.vertex_machine_counts(g.src, g.dst, assign, g.num_vertices, p)
    ne = np.array([len(o) for o in order], dtype=np.int64)
    tcal, tcom, nv, nmat = st_.full_costs(counts, ne, costs.c_node, costs.c_edge, costs.c_com)
    chosen = np.full(len(leftover), -1, dtype=np.int64)
    tiers = np.full(len(leftover), -1, dtype=np.int64)
    placed = st_.repair_edges(leftover, g.src, g.dst, counts, ne, nv, tcal, tcom, nmat,
                              costs.c_node, costs.c_edge, costs.c_com, costs.mem,
                              costs.m_node, costs.m_edge, np.ones(p, dtype=np.uint8),
                              chosen, tiers)
    if placed < len(leftover):
        e = int(leftover[placed])
        raise InfeasibleError(
            f"edge ({g.label(g.src[e])}, {g.label(g.dst[e])}) fits on no machine"
        )
    out = list(order)
    for i in range(p):
        extra = leftover[chosen == i]
        if len(extra):
            out[i] = np.concatenate([out[i], extra])
    return out


def run_phase2(g, f, plan: CapacityPlan, alpha=0.3, beta=0.3) -> Partitioning:
    """Expand every machine's partition according to ``plan``."""
    check_plan(plan, g.num_edges)
    if plan.p != f.p:
        raise ValidationError("plan and fleet disagree on the machine count")
    costs = st_.CostArrays(f)
    ctx = ExpansionContext(g, alpha=alpha, beta=beta)
    machines = processing_order(plan.deltas)
    grown = grow_machines(ctx, machines, plan.deltas, costs)
    order = [grown[i] for i in range(f.p)]
    if ctx.remaining_count:
        order = spill(g, f, order, ctx.remaining_edges(), costs)
    return Partitioning.from_order(g.num_edges, order)
