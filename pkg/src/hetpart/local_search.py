"""Local search over an edge partitioning.

Two moves are alternated.  Destroy-and-repair strips the most recently
placed edges from the most expensive machines and re-places them greedily.
After ``n0`` consecutive non-improving attempts the worst machine and the
``k - 1`` machines sharing the most replicas with it are emptied and
re-expanded from scratch with freshly computed budgets.  The best
partitioning seen is kept aside and returned.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import state as st_
from .capacity import water_fill
from .errors import InfeasibleError, InvariantError, ValidationError
from .expansion import ExpansionContext, grow_machines, processing_order
from .metrics import Partitioning, check_cost_range

OBJECTIVES = ("tc", "mapreduce")


@dataclass
class SlsParams:
    gamma: float = 0.9
    theta: float = 0.01
    n0: int = 5
    t0: int = 10
    k: int = 2
    alpha: float = 0.3
    beta: float = 0.3
    objective: str = "tc"

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValidationError("gamma must lie in [0, 1]")
        if not 0 < self.theta < 1:
            raise ValidationError("theta must lie in (0, 1)")
        if self.n0 < 1:
            raise ValidationError("n0 must be >= 1")
        if self.t0 < 0:
            raise ValidationError("t0 must be >= 0")
        if self.k < 2:
            raise ValidationError("k must be >= 2")
        if not (0 <= self.alpha <= 1 and 0 <= self.beta <= 1):
            raise ValidationError("alpha and beta must lie in [0, 1]")
        if self.objective not in OBJECTIVES:
            raise ValidationError(f"objective must be one of {OBJECTIVES}")


def destroy_count(theta: float, ne: int) -> int:
    # rounding guards against 0.1 * 30 = 3.0000000000000004 style noise
    return math.ceil(round(theta * ne, 9))


class SearchState:
    """Working partitioning with incrementally maintained costs.

    ``order[i]`` arrays are never mutated in place, so snapshots are
    shallow copies of the list.
    """

    def __init__(self, g, f, pt: Partitioning, objective="tc"):
        if pt.p != f.p:
            raise ValidationError(f"partitioning has {pt.p} machines, fleet has {f.p}")
        check_cost_range(g, f)
        self.g, self.f = g, f
        self.costs = st_.CostArrays(f)
        self.objective_name = objective
        self.assign = pt.assign.copy()
        self.order = [np.asarray(o, dtype=np.int64) for o in pt.order]
        self.counts = pt.counts(g)
        self.ne = np.array([len(o) for o in self.order], dtype=np.int64)
        c = self.costs
        self.tcal, self.tcom, self.nv, self.nmat = st_.full_costs(
            self.counts, self.ne, c.c_node, c.c_edge, c.c_com)
        self.all_machines = np.ones(f.p, dtype=np.uint8)
        self.last_repair: list[tuple[int, int, int]] = []
        self.repair_infeasible = False
        self.last_victims: list[int] = []

    @property
    def p(self) -> int:
        return self.f.p

    def totals(self) -> np.ndarray:
        return self.tcal + self.tcom

    def tc(self):
        return self.totals().max().item()

    def objective(self):
        if self.objective_name == "mapreduce":
            return (self.tcal.max() + self.tcom.max()).item()
        return self.tc()

    def partitioning(self) -> Partitioning:
        return Partitioning(self.assign.copy(), list(self.order))

    def _kernel_args(self):
        c = self.costs
        return (self.g.src, self.g.dst, self.counts, self.ne, self.nv, self.tcal, self.tcom,
                self.nmat, c.c_node, c.c_edge, c.c_com)

    def add(self, edges, machines):
        st_.add_edges(edges, machines, *self._kernel_args())
        self.assign[edges] = machines

    def remove(self, edges, machines):
        st_.remove_edges(edges, machines, *self._kernel_args())
        self.assign[edges] = -1

    def repair(self, edges, allowed=None):
        """Greedy placement; returns (placed count, machines, tiers)."""
        c = self.costs
        allowed = self.all_machines if allowed is None else allowed
        chosen = np.full(len(edges), -1, dtype=np.int64)
        tiers = np.full(len(edges), -1, dtype=np.int64)
        placed = st_.repair_edges(edges, *self._kernel_args(), c.mem, c.m_node, c.m_edge,
                                  allowed, chosen, tiers)
        self.assign[edges[:placed]] = chosen[:placed]
        return placed, chosen, tiers

    def _snapshot(self):
        return (list(self.order), self.tcal.copy(), self.tcom.copy())

    def _restore_arrays(self, snap):
        self.order = snap[0]
        self.tcal[:] = snap[1]
        self.tcom[:] = snap[2]

    def memory_ok(self) -> bool:
        c = self.costs
        return bool(np.all(c.m_node * self.nv + c.m_edge * self.ne <= c.mem))

    def check(self, memory=True) -> None:
        """Compare every incremental quantity with a full recomputation."""
        g, c = self.g, self.costs
        assign = np.full(g.num_edges, -1, dtype=np.int32)
        for i, o in enumerate(self.order):
            assign[o] = i
        if not np.array_equal(assign, self.assign):
            raise InvariantError("assign and order lists disagree")
        if np.any(assign < 0):
            raise InvariantError("some edge is unassigned")
        if sum(len(o) for o in self.order) != g.num_edges:
            raise InvariantError("an edge is listed twice")
        counts = st_.vertex_machine_counts(g.src, g.dst, assign, g.num_vertices, self.p)
        ne = np.array([len(o) for o in self.order], dtype=np.int64)
        tcal, tcom, nv, nmat = st_.full_costs(counts, ne, c.c_node, c.c_edge, c.c_com)
        same = (np.array_equal(counts, self.counts) and np.array_equal(ne, self.ne)
                and np.array_equal(nv, self.nv) and np.array_equal(nmat, self.nmat)
                and np.allclose(tcal, self.tcal, rtol=1e-12, atol=0)
                and np.allclose(tcom, self.tcom, rtol=1e-12, atol=0))
        if not same:
            raise InvariantError("incremental costs drifted from full recomputation")
        used = c.m_node * nv + c.m_edge * ne
        if memory and np.any(used > c.mem):
            i = int(np.flatnonzero(used > c.mem)[0])
            raise InvariantError(f"machine {i + 1} exceeds its memory")

    # -- moves -------------------------------------------------------------

    def destroy_repair(self, gamma=0.9, theta=0.01) -> bool:
        """One destroy-and-repair attempt; keeps the result only if the
        objective strictly drops.  Returns whether it did."""
        before = self.objective()
        t = self.totals()
        thd = t.min() + gamma * (t.max() - t.min())
        victims = [i for i in range(self.p) if t[i] >= thd and self.ne[i] > 0]
        self.last_victims = victims
        snap = self._snapshot()
        removed, owners = [], []
        for i in victims:
            cnt = destroy_count(theta, int(self.ne[i]))
            tail = self.order[i][-cnt:]
            self.order[i] = self.order[i][:-cnt]
            removed.append(tail[::-1])
            owners.append(np.full(cnt, i, dtype=np.int64))
        if not removed:
            self.last_repair = []
            return False
        removed = np.concatenate(removed)
        owners = np.concatenate(owners)
        self.remove(removed, owners)
        placed, chosen, tiers = self.repair(removed)
        self.repair_infeasible = placed < len(removed)
        self.last_repair = list(zip(removed[:placed].tolist(), chosen[:placed].tolist(),
                                    tiers[:placed].tolist()))
        if placed == len(removed):
            self._append(removed, chosen)
            if self.objective() < before:
                return True
        # roll back
        self.remove(removed[:placed], chosen[:placed])
        self.add(removed, owners)
        self._restore_arrays(snap)
        return False

    def _append(self, edges, machines):
        for i in np.unique(machines).tolist():
            self.order[i] = np.concatenate([self.order[i], edges[machines == i]])

    def select_for_repartition(self, k: int) -> list[int]:
        """Worst machine plus its ``k - 1`` largest-overlap partners."""
        t = self.totals()
        i = int(np.argmax(t))
        others = sorted((j for j in range(self.p) if j != i),
                        key=lambda j: (-int(self.nmat[i, j]), j))
        return sorted([i] + others[: k - 1])

    def repartition(self, k=2, alpha=0.3, beta=0.3) -> bool:
        """Re-expand the selected machines; returns False when aborted."""
        if not 2 <= k <= self.p:
            raise ValidationError(f"k must lie in [2, {self.p}]")
        g = self.g
        sel = self.select_for_repartition(k)
        pool = np.concatenate([self.order[j] for j in sel])
        if len(pool) == 0:
            return False
        owners = self.assign[pool].astype(np.int64)
        snap = self._snapshot()
        self.remove(pool, owners)
        for j in sel:
            self.order[j] = np.empty(0, dtype=np.int64)
        pool_vertices = len(np.unique(np.concatenate([g.src[pool], g.dst[pool]])))
        try:
            plan = water_fill(pool_vertices, len(pool), self.f.subset(sel))
        except InfeasibleError:
            self.add(pool, owners)
            self._restore_arrays(snap)
            return False
        budgets = {j: d for j, d in zip(sel, plan.deltas)}
        border = (self.counts > 0).any(axis=1)
        ctx = ExpansionContext(g, edges=pool, border=border, alpha=alpha, beta=beta)
        seq = [sel[t] for t in processing_order(plan.deltas)]
        grown = grow_machines(ctx, seq, budgets, self.costs)
        for j in sel:
            e = grown[j]
            if len(e):
                self.add(e, np.full(len(e), j, dtype=np.int64))
            self.order[j] = e
        if ctx.remaining_count:
            left = ctx.remaining_edges()
            allowed = np.zeros(self.p, dtype=np.uint8)
            allowed[sel] = 1
            placed, chosen, _ = self.repair(left, allowed)
            if placed < len(left):
                for j in sel:
                    if len(self.order[j]):
                        self.remove(self.order[j], np.full(len(self.order[j]), j, dtype=np.int64))
                self.remove(left[:placed], chosen[:placed])
                self.add(pool, owners)
                self._restore_arrays(snap)
                return False
            self._append(left, chosen)
        return True


def balanced_greedy_repair(candidates, pt: Partitioning, f, g, edge: int):
    """Candidate machine (0-based) with the lowest current T_i that can still
    hold ``edge``; ties go to the lower index.  ``None`` when none can."""
    s = SearchState(g, f, pt)
    x, y = int(g.src[edge]), int(g.dst[edge])
    t = s.totals()
    best = None
    for i in sorted(candidates):
        extra = int(s.counts[x, i] == 0) + int(s.counts[y, i] == 0)
        if f.m_node * (s.nv[i] + extra) + f.m_edge * (s.ne[i] + 1) > f.machines[i].mem:
            continue
        if best is None or t[i] < t[best]:
            best = i
    return best


def destroy_repair(pt: Partitioning, f, g, params: SlsParams | None = None):
    """Single destroy-and-repair attempt: ``(partitioning, improved)``."""
    params = params or SlsParams()
    if f.p < 2:
        raise ValidationError("destroy-and-repair needs at least two machines")
    s = SearchState(g, f, pt, params.objective)
    ok = s.destroy_repair(params.gamma, params.theta)
    return s.partitioning(), ok


def repartition(pt: Partitioning, f, g, k=2, params: SlsParams | None = None) -> Partitioning:
    params = params or SlsParams()
    s = SearchState(g, f, pt, params.objective)
    s.repartition(k, params.alpha, params.beta)
    return s.partitioning()


def sls(pt: Partitioning, f, g, params: SlsParams | None = None, log_path=None,
        check=False) -> Partitioning:
    """Run ``params.t0`` iterations of local search and return the best
    partitioning seen.

    With ``check`` every move is followed by a full recomputation of the
    incremental state (slow; for tests).
    """
    params = params or SlsParams()
    if params.t0 == 0 or f.p < 2:
        return pt.copy()
    s = SearchState(g, f, pt, params.objective)
    # an input that already breaks memory can only be checked for consistency
    mem_check = s.memory_ok()
    k = min(params.k, f.p)
    best_val = s.objective()
    best_order = list(s.order)
    fails = 0
    rows = []
    for it in range(params.t0):
        before = s.objective()
        ok = s.destroy_repair(params.gamma, params.theta)
        if check:
            s.check(mem_check)
        rows.append((it, "destroy_repair", before, s.objective(), int(ok)))
        if ok:
            fails = 0
        else:
            fails += 1
            if fails >= params.n0:
                before = s.objective()
                s.repartition(k, params.alpha, params.beta)
                if check:
                    s.check(mem_check)
                after = s.objective()
                rows.append((it, "repartition", before, after, int(after < before)))
                fails = 0
        if s.objective() < best_val:
            best_val = s.objective()
            best_order = list(s.order)
    if log_path is not None:
        with open(log_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "op", "tc_before", "tc_after", "improved"])
            w.writerows(rows)
    return Partitioning.from_order(g.num_edges, best_order)
