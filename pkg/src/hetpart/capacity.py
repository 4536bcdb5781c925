"""Per-machine edge budgets.

The budgets balance calculation time ``C_i * delta_i`` across machines
while respecting memory, with the vertex count of a partition estimated
from the graph's global vertex/edge ratio.  All arithmetic is exact
(``fractions.Fraction``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetError, InfeasibleError, ValidationError
from .machines import Fleet, vertex_ratio

ORACLE_MAX_MACHINES = 4
ORACLE_MAX_EDGES = 60


@dataclass
class CapacityPlan:
    deltas: list[int]
    lambda_: Fraction
    saturated: list[bool]
    costs: list[Fraction] = field(default_factory=list)
    bounds: list[int] = field(default_factory=list)

    @property
    def p(self) -> int:
        return len(self.deltas)

    def to_dict(self) -> dict:
        return {
            "deltas": list(self.deltas),
            "lambda": _num(self.lambda_),
            "saturated": list(self.saturated),
            "effective_costs": [_num(c) for c in self.costs],
            "memory_bounds": list(self.bounds),
        }


def _num(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


def memory_bound(mem, m_node, m_edge, ratio: Fraction) -> int:
    """Largest ``d`` with ``m_node * ceil(ratio * d) + m_edge * d <= mem``."""
    mem, m_node, m_edge = Fraction(mem), Fraction(m_node), Fraction(m_edge)
    d = math.floor(mem / (m_edge + m_node * ratio))
    while d > 0 and m_node * math.ceil(ratio * d) + m_edge * d > mem:
        d -= 1
    return max(d, 0)


def _setup(num_vertices, num_edges, f: Fleet):
    r = vertex_ratio(num_vertices, num_edges)
    costs = [Fraction(m.c_edge) + r * Fraction(m.c_node) for m in f.machines]
    bounds = [memory_bound(m.mem, f.m_node, f.m_edge, r) for m in f.machines]
    total = sum(bounds)
    if total < num_edges:
        raise InfeasibleError(
            f"fleet memory holds at most {total} edges but the graph has {num_edges}"
        )
    return costs, bounds


def water_fill(num_vertices: int, num_edges: int, f: Fleet) -> CapacityPlan:
    """Iterative water-filling on explicit counts (see :func:`allocate_capacities`)."""
    p = f.p
    costs, bounds = _setup(num_vertices, num_edges, f)
    deltas = [0] * p
    saturated = [False] * p
    active = list(range(p))
    R = Fraction(num_edges)
    while True:
        T = sum(1 / costs[i] for i in active)
        capped = False
        for i in list(active):
            proposal = R / T / costs[i]
            if proposal > bounds[i]:
                deltas[i] = bounds[i]
                saturated[i] = True
                R -= bounds[i]
                active.remove(i)
                capped = True
        if not capped or not active:
            break
    if active:
        T = sum(1 / costs[i] for i in active)
        for i in active:
            deltas[i] = math.floor(R / T / costs[i])
    rest = num_edges - sum(deltas)
    # top up one edge at a time, cheapest machines first
    ring = sorted(active, key=lambda i: (costs[i], i))
    while rest > 0:
        moved = False
        for i in ring:
            if rest == 0:
                break
            if deltas[i] < bounds[i]:
                deltas[i] += 1
                rest -= 1
                moved = True
        if not moved:
            raise InfeasibleError(f"{rest} edges left over after capacity allocation")
    lam = max(costs[i] * deltas[i] for i in range(p))
    return CapacityPlan(deltas, lam, saturated, costs, bounds)


def allocate_capacities(g, f: Fleet) -> CapacityPlan:
    """Edge budgets for every machine of ``f`` on graph ``g``.

    Each round spreads the remaining edges in proportion to ``1/C_i`` over
    the machines still open; a machine whose share exceeds its memory bound
    is fixed at that bound and closed.  When a round closes nothing, the
    open machines take the floor of their share and the integer remainder
    goes one edge at a time to the cheapest open machines.
    """
    return water_fill(g.num_vertices, g.num_edges, f)


def allocate_capacities_relaxed(g, f: Fleet) -> list[Fraction]:
    """Real-valued budgets: the same rounds without integer rounding."""
    r = vertex_ratio(g.num_vertices, g.num_edges)
    costs = [Fraction(m.c_edge) + r * Fraction(m.c_node) for m in f.machines]
    caps = [Fraction(m.mem) / (Fraction(f.m_edge) + Fraction(f.m_node) * r) for m in f.machines]
    if sum(caps) < g.num_edges:
        raise InfeasibleError("fleet memory too small")
    deltas = [Fraction(0)] * f.p
    active = list(range(f.p))
    R = Fraction(g.num_edges)
    while active:
        T = sum(1 / costs[i] for i in active)
        capped = [i for i in active if R / T / costs[i] > caps[i]]
        if not capped:
            for i in active:
                deltas[i] = R / T / costs[i]
            break
        for i in capped:
            deltas[i] = caps[i]
            R -= caps[i]
            active.remove(i)
    return deltas


def proportional_capacities(g, f: Fleet) -> CapacityPlan:
    """Budgets proportional to machine memory, ignoring compute cost.

    The naive plan used by the ablation without capacity pre-allocation.
    """
    costs, bounds = _setup(g.num_vertices, g.num_edges, f)
    mems = [Fraction(m.mem) for m in f.machines]
    total = sum(mems)
    deltas = [min(math.floor(g.num_edges * mem / total), b) for mem, b in zip(mems, bounds)]
    rest = g.num_edges - sum(deltas)
    ring = sorted(range(f.p), key=lambda i: (-mems[i], i))
    while rest > 0:
        moved = False
        for i in ring:
            if rest and deltas[i] < bounds[i]:
                deltas[i] += 1
                rest -= 1
                moved = True
        if not moved:
            raise InfeasibleError(f"{rest} edges left over after capacity allocation")
    lam = max(c * d for c, d in zip(costs, deltas))
    sat = [d == b for d, b in zip(deltas, bounds)]
    return CapacityPlan(deltas, lam, sat, costs, bounds)


def optimal_capacities_oracle(g, f: Fleet) -> CapacityPlan:
    """Exact minimum-lambda budgets by exhaustive enumeration (tiny instances).

    Ties on lambda go to the budget vector that loads lower-indexed
    machines first (lexicographically largest).
    """
    p, m = f.p, g.num_edges
    if p > ORACLE_MAX_MACHINES or m > ORACLE_MAX_EDGES:
        raise BudgetError(
            f"oracle limited to p <= {ORACLE_MAX_MACHINES} and |E| <= {ORACLE_MAX_EDGES}"
        )
    costs, bounds = _setup(g.num_vertices, m, f)
    best = None
    best_lam = None
    cur = [0] * p

    def rec(i, left, lam):
        nonlocal best, best_lam
        if best_lam is not None and lam > best_lam:
            return
        if i == p - 1:
            if left > bounds[i]:
                return
            cur[i] = left
            total = max(lam, costs[i] * left)
            if best_lam is None or total < best_lam:
                best_lam, best = total, list(cur)
            return
        for d in range(min(left, bounds[i]), -1, -1):
            cur[i] = d
            rec(i + 1, left - d, max(lam, costs[i] * d))

    rec(0, m, Fraction(0))
    if best is None:
        raise InfeasibleError("no feasible budget vector")
    sat = [d == b for d, b in zip(best, bounds)]
    return CapacityPlan(best, best_lam, sat, costs, bounds)


def check_plan(plan: CapacityPlan, num_edges: int) -> None:
    if sum(plan.deltas) != num_edges:
        raise ValidationError(f"plan covers {sum(plan.deltas)} edges, graph has {num_edges}")
    if any(d < 0 for d in plan.deltas):
        raise ValidationError("negative budget")
