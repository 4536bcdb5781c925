"""Cost model evaluation of edge partitionings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import state as st_
from .errors import CapacityError, IntegrityError, InvariantError, ValidationError

SCHEMA_VERSION = 1
_INT_LIMIT = 2**62


class Partitioning:
    """Edge to machine assignment plus per-machine insertion order.

    ``assign[e]`` is the 0-based machine of edge ``e``; ``order[i]`` lists
    machine ``i``'s edges in the order they were placed (the destroy step
    removes from the tail).
    """

    def __init__(self, assign: np.ndarray, order: list[np.ndarray]):
        self.assign = assign
        self.order = order

    @property
    def p(self) -> int:
        return len(self.order)

    @property
    def num_edges(self) -> int:
        return len(self.assign)

    @classmethod
    def from_order(cls, num_edges: int, order) -> "Partitioning":
        order = [np.asarray(o, dtype=np.int64) for o in order]
        assign = np.full(num_edges, -1, dtype=np.int32)
        for i, o in enumerate(order):
            if len(o) and (o.min() < 0 or o.max() >= num_edges):
                raise IntegrityError(f"machine {i + 1} lists an unknown edge id")
            if np.any(assign[o] >= 0) or len(np.unique(o)) != len(o):
                seen = np.zeros(num_edges, dtype=bool)
                for lst in order[: i + 1]:
                    for e in lst.tolist():
                        if seen[e]:
                            raise IntegrityError(f"edge {e} is assigned twice")
                        seen[e] = True
            assign[o] = i
        return cls(assign, order)

    @classmethod
    def from_assign(cls, assign, p: int) -> "Partitioning":
        assign = np.asarray(assign, dtype=np.int32)
        if len(assign) and (assign.min() < -1 or assign.max() >= p):
            raise ValidationError(f"machine index outside 1..{p}")
        order = [np.flatnonzero(assign == i) for i in range(p)]
        return cls(assign.copy(), order)

    def copy(self) -> "Partitioning":
        return Partitioning(self.assign.copy(), [o.copy() for o in self.order])

    def sizes(self) -> list[int]:
        return [len(o) for o in self.order]

    def counts(self, g) -> np.ndarray:
        """``deg_i(u)`` as an (n, p) matrix."""
        return st_.vertex_machine_counts(g.src, g.dst, self.assign, g.num_vertices, self.p)

    def vsets(self, g) -> np.ndarray:
        """(p, n) boolean membership matrix of the vertex sets V_i."""
        return (self.counts(g) > 0).T

    def replica_counts(self, g) -> np.ndarray:
        """Number of machines hosting each vertex."""
        return (self.counts(g) > 0).sum(axis=1)

    def n_matrix(self, g) -> np.ndarray:
        """``n[i, j] = |V_i & V_j|`` for i != j, zero diagonal."""
        v = self.vsets(g).astype(np.int64)
        nm = v @ v.T
        np.fill_diagonal(nm, 0)
        return nm

    def validate(self, g, f=None) -> None:
        """Raise unless this is a complete edge partition of ``g`` (and, with
        a fleet, every machine fits in memory)."""
        if self.num_edges != g.num_edges:
            raise IntegrityError(
                f"assignment covers {self.num_edges} edges, graph has {g.num_edges}"
            )
        missing = np.flatnonzero(self.assign < 0)
        if len(missing):
            e = int(missing[0])
            raise IntegrityError(f"edge ({g.label(g.src[e])}, {g.label(g.dst[e])}) is unassigned")
        total = 0
        for i, o in enumerate(self.order):
            if len(o) and np.any(self.assign[o] != i):
                raise InvariantError(f"order list of machine {i + 1} disagrees with assign")
            total += len(o)
        if total != g.num_edges:
            raise InvariantError("order lists do not partition the edge set")
        if f is not None:
            if f.p != self.p:
                raise ValidationError(f"partitioning has {self.p} machines, fleet has {f.p}")
            counts = self.counts(g)
            nv = (counts > 0).sum(axis=0)
            for i, m in enumerate(f.machines):
                used = f.m_node * int(nv[i]) + f.m_edge * len(self.order[i])
                if used > m.mem:
                    raise InvariantError(
                        f"machine {i + 1} needs {used} memory units, has {m.mem}"
                    )


@dataclass
class MachineCost:
    id: int
    num_vertices: int
    num_edges: int
    t_cal: float
    t_com: float
    t_total: float
    mem_used: float


@dataclass
class CostReport:
    machines: list[MachineCost]
    tc: float
    rf: Fraction
    tc_mr: float

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tc": self.tc,
            "rf": float(self.rf),
            "rf_exact": f"{self.rf.numerator}/{self.rf.denominator}",
            "tc_mr": self.tc_mr,
            "per_machine": [asdict(m) for m in self.machines],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["machine", "vertices", "edges", "t_cal", "t_com", "t_total", "mem_used"])
        for m in self.machines:
            w.writerow([m.id, m.num_vertices, m.num_edges, m.t_cal, m.t_com, m.t_total, m.mem_used])
        return out.getvalue()

    def histogram(self) -> list[tuple]:
        return [(m.t_cal, m.t_com) for m in self.machines]


def check_cost_range(g, f) -> None:
    """Refuse integer fleets whose worst-case cost could overflow int64."""
    if f.dtype is not np.int64:
        return
    worst = 0
    for m in f.machines:
        worst = max(worst, m.c_node * g.num_vertices + m.c_edge * g.num_edges)
    worst += 2 * max(m.c_com for m in f.machines) * max(f.p - 1, 0) * g.num_vertices
    if worst >= _INT_LIMIT:
        raise CapacityError("cost values could exceed the 64-bit integer range")


def _py(x):
    return x.item() if hasattr(x, "item") else x


def cost_report(pt: Partitioning, f, g) -> CostReport:
    """Per-machine calculation and communication cost, TC, RF."""
    if pt.num_edges != g.num_edges:
        raise IntegrityError(f"assignment covers {pt.num_edges} edges, graph has {g.num_edges}")
    if pt.p != f.p:
        raise ValidationError(f"partitioning has {pt.p} machines, fleet has {f.p}")
    check_cost_range(g, f)
    costs = st_.CostArrays(f)
    counts = pt.counts(g)
    ne = np.array(pt.sizes(), dtype=np.int64)
    tcal, tcom, nv, _ = st_.full_costs(counts, ne, costs.c_node, costs.c_edge, costs.c_com)
    machines = []
    for i in range(f.p):
        mem_used = f.m_node * int(nv[i]) + f.m_edge * int(ne[i])
        machines.append(MachineCost(i + 1, int(nv[i]), int(ne[i]), _py(tcal[i]), _py(tcom[i]),
                                    _py(tcal[i] + tcom[i]), mem_used))
    tc = max(m.t_total for m in machines)
    rf = Fraction(int(nv.sum()), g.num_vertices)
    tc_mr = max(m.t_cal for m in machines) + max(m.t_com for m in machines)
    return CostReport(machines, tc, rf, tc_mr)


def total_cost(pt: Partitioning, f, g):
    return cost_report(pt, f, g).tc


def replication_factor(pt: Partitioning, g) -> Fraction:
    """Average number of machines per vertex, as an exact fraction."""
    return Fraction(int(pt.replica_counts(g).sum()), g.num_vertices)


def mapreduce_objective(pt: Partitioning, f, g):
    """Largest calculation cost plus largest communication cost."""
    return cost_report(pt, f, g).tc_mr


def tc_com_rf_consistency(pt: Partitioning, g) -> tuple[int, int]:
    """``(replica pairs charged by T^com, sum_u r(u) (r(u) - 1))``.

    ``r(u)`` is the number of machines hosting ``u``.  The first value is
    ``sum_i T_i^com`` when every ordered machine pair sharing a vertex costs
    one unit; with every ``c_com = 1`` each pair costs ``1 + 1`` and the
    communication total is exactly twice the returned value.
    """
    counts = pt.counts(g)
    ones = np.ones(pt.p, dtype=np.int64)
    zeros = np.zeros(pt.p, dtype=np.int64)
    ne = np.array(pt.sizes(), dtype=np.int64)
    _, tcom, _, _ = st_.full_costs(counts, ne, zeros, ones, ones)
    r = (counts > 0).sum(axis=1).astype(np.int64)
    return int(tcom.sum()) // 2, int((r * (r - 1)).sum())
