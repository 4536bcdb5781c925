"""Method dispatch: capacity plan, expansion, local search, baselines."""

from __future__ import annotations

from dataclasses import dataclass, field

from .baselines import partition_degree_hash, partition_hash
from .capacity import CapacityPlan, allocate_capacities, proportional_capacities
from .errors import ValidationError
from .expansion import run_phase2
from .local_search import SlsParams, sls
from .metrics import Partitioning, check_cost_range

METHODS = ("windgp", "windgp-noSLS", "windgp-noBFS", "hash", "degree-hash")
CAPACITY_MODES = ("plan", "naive")


@dataclass
class RunConfig:
    method: str = "windgp"
    capacity: str = "plan"
    seed: int = 0
    sls: SlsParams = field(default_factory=SlsParams)
    check: bool = False
    log_path: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.capacity not in CAPACITY_MODES:
            raise ValidationError(f"unknown capacity mode {self.capacity!r}")


def make_plan(g, f, capacity="plan") -> CapacityPlan:
    if capacity == "naive":
        return proportional_capacities(g, f)
    return allocate_capacities(g, f)


def partition(g, f, cfg: RunConfig | None = None) -> tuple[Partitioning, CapacityPlan]:
    """Partition ``g`` over ``f`` with the configured method."""
    cfg = cfg or RunConfig()
    check_cost_range(g, f)
    plan = make_plan(g, f, cfg.capacity)
    if cfg.method == "hash":
        return partition_hash(g, f, plan, cfg.seed), plan
    if cfg.method == "degree-hash":
        return partition_degree_hash(g, f, plan, cfg.seed), plan
    alpha, beta = cfg.sls.alpha, cfg.sls.beta
    if cfg.method == "windgp-noBFS":
        alpha = beta = 0.0
    pt = run_phase2(g, f, plan, alpha, beta)
    if cfg.method == "windgp":
        pt = sls(pt, f, g, cfg.sls, cfg.log_path, cfg.check)
    return pt, plan
