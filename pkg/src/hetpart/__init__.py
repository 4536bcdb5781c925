"""Edge partitioning for clusters of machines with different speeds and memory."""

__version__ = "0.1.0"

from .capacity import CapacityPlan, allocate_capacities, optimal_capacities_oracle
from .errors import (
    CapacityError,
    HetpartError,
    InfeasibleError,
    IntegrityError,
    InvariantError,
    ParseError,
    ValidationError,
)
from .graph import Graph, generate_rmat, load_edge_list, neighbors
from .machines import Fleet, MachineSpec, effective_costs, load_fleet, memory_feasible
from .metrics import CostReport, Partitioning, cost_report, replication_factor
from .pipeline import RunConfig, partition

__all__ = [
    "CapacityError", "CapacityPlan", "CostReport", "Fleet", "Graph", "HetpartError",
    "InfeasibleError", "IntegrityError", "InvariantError", "MachineSpec", "ParseError",
    "Partitioning", "RunConfig", "ValidationError", "allocate_capacities", "cost_report",
    "effective_costs", "generate_rmat", "load_edge_list", "load_fleet", "memory_feasible",
    "neighbors", "optimal_capacities_oracle", "partition", "replication_factor",
]
