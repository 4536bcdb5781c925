"""Bulk-synchronous superstep cost simulation over a partitioning.

Each superstep every machine computes on its active vertices and edges,
then synchronises the active vertices it shares with other machines; the
step lasts as long as the slowest machine.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numba
import numpy as np

from . import state as st_
from .errors import ValidationError
from .metrics import SCHEMA_VERSION, Partitioning, check_cost_range


@dataclass
class SimReport:
    kind: str
    step_costs: list            # critical path time of each superstep
    machine_busy: list          # summed per-machine time over all supersteps
    frontier_sizes: list = field(default_factory=list)

    @property
    def supersteps(self) -> int:
        return len(self.step_costs)

    @property
    def total(self):
        return sum(self.step_costs)

    @property
    def utilization(self) -> list[float]:
        tot = self.total
        return [float(b) / tot if tot else 0.0 for b in self.machine_busy]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "supersteps": self.supersteps,
            "total": self.total,
            "step_costs": list(self.step_costs),
            "utilization": self.utilization,
            "frontier_sizes": list(self.frontier_sizes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["step", "cost", "frontier"])
        sizes = self.frontier_sizes or [""] * self.supersteps
        for t, (c, s) in enumerate(zip(self.step_costs, sizes)):
            w.writerow([t, c, s])
        return out.getvalue()


def _py(x):
    return x.item() if hasattr(x, "item") else x


def simulate_dense(pt: Partitioning, f, g, steps: int) -> SimReport:
    """Every vertex and edge active in every superstep."""
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    check_cost_range(g, f)
    c = st_.CostArrays(f)
    ne = np.array(pt.sizes(), dtype=np.int64)
    tcal, tcom, _, _ = st_.full_costs(pt.counts(g), ne, c.c_node, c.c_edge, c.c_com)
    t = tcal + tcom
    step = _py(t.max())
    return SimReport("dense", [step] * steps, [_py(x) * steps for x in t])


@numba.njit(cache=True)
def _frontier_steps(offsets, nbrs, eids, assign, counts, source, c_node, c_edge, c_com):
    n, p = counts.shape
    level = np.full(n, -1, dtype=np.int64)
    level[source] = 0
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    frontier[0] = source
    fsize = 1
    edge_seen = np.zeros(eids.shape[0] // 2 + 1, dtype=np.int64)
    steps = []
    sizes = []
    busy = np.zeros(p, dtype=c_edge.dtype)
    hosts = np.empty(p, dtype=np.int64)
    t = 0
    while fsize > 0:
        t += 1
        cost = np.zeros(p, dtype=c_edge.dtype)
        nsize = 0
        for a in range(fsize):
            u = frontier[a]
            r = 0
            cs = c_com[0] * 0
            for i in range(p):
                if counts[u, i] > 0:
                    hosts[r] = i
                    r += 1
                    cs += c_com[i]
            for b in range(r):
                i = hosts[b]
                cost[i] += c_node[i] + (r - 2) * c_com[i] + cs
            for k in range(offsets[u], offsets[u + 1]):
                e = eids[k]
                # an edge is processed once per step even if both ends are active
                if edge_seen[e] != t:
                    edge_seen[e] = t
                    i = assign[e]
                    cost[i] += c_edge[i]
                v = nbrs[k]
                if level[v] < 0:
                    level[v] = t
                    nxt[nsize] = v
                    nsize += 1
        step = cost[0]
        for i in range(p):
            busy[i] += cost[i]
            if cost[i] > step:
                step = cost[i]
        steps.append(step)
        sizes.append(fsize)
        frontier, nxt = nxt, frontier
        fsize = nsize
    return steps, sizes, busy


def simulate_frontier(pt: Partitioning, f, g, source: int) -> SimReport:
    """Breadth-first levels from ``source``: only the current frontier and
    the edges incident to it are active, and only active replicated
    vertices are synchronised."""
    if not 0 <= source < g.num_vertices:
        raise ValidationError(f"source vertex {source} out of range")
    check_cost_range(g, f)
    c = st_.CostArrays(f)
    steps, sizes, busy = _frontier_steps(g.offsets, g.neighbors, g.edge_ids, pt.assign,
                                         pt.counts(g), source, c.c_node, c.c_edge, c.c_com)
    return SimReport("frontier", [_py(x) for x in steps], [_py(x) for x in busy], list(sizes))
