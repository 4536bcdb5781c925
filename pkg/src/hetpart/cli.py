"""Command-line interface.

Exit codes: 0 success, 2 parse or validation error, 3 infeasible,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .baselines import to_vertex_partition
from .errors import HetpartError, ParseError
from .formats import read_assignment, write_assignment, write_vertex_map
from .graph import generate_rmat, load_edge_list, write_edge_list
from .local_search import SlsParams
from .machines import load_fleet
from .metrics import SCHEMA_VERSION, cost_report
from .pipeline import CAPACITY_MODES, METHODS, RunConfig, make_plan, partition
from .simulator import simulate_dense, simulate_frontier


def _load_graph(path, mode):
    if mode == "yes":
        return load_edge_list(path, renumber=True)
    try:
        return load_edge_list(path, renumber=False)
    except ParseError as exc:
        if mode == "auto" and "non-integer" in str(exc):
            return load_edge_list(path, renumber=True)
        raise


def _write_json(obj, path):
    text = json.dumps(obj, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _common(sp, assignment=False):
    if assignment:
        sp.add_argument("assignment", help="assignment file (u v machine_id)")
    sp.add_argument("graph", help="edge-list file")
    sp.add_argument("fleet", help="fleet file (text or JSON)")
    sp.add_argument("--renumber", choices=("auto", "yes", "no"), default="auto",
                    help="map vertex tokens to dense ids (auto: only if a token is not an integer)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hetpart",
                                 description="Edge partitioning for heterogeneous clusters.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("plan", help="print per-machine edge budgets as JSON")
    _common(sp)
    sp.add_argument("--capacity", choices=CAPACITY_MODES, default="plan")
    sp.add_argument("--out", default="-")

    sp = sub.add_parser("partition", help="partition a graph")
    _common(sp)
    sp.add_argument("--method", choices=METHODS, default="windgp")
    sp.add_argument("--capacity", choices=CAPACITY_MODES, default="plan",
                    help="'naive' sets budgets proportional to memory")
    sp.add_argument("--alpha", type=float, default=0.3)
    sp.add_argument("--beta", type=float, default=0.3)
    sp.add_argument("--gamma", type=float, default=0.9)
    sp.add_argument("--theta", type=float, default=0.01)
    sp.add_argument("--n0", type=int, default=5)
    sp.add_argument("--t0", type=int, default=10)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--objective", choices=("tc", "mapreduce"), default="tc")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="assignment.txt", help="assignment file")
    sp.add_argument("--plan-out", help="capacity plan JSON")
    sp.add_argument("--report-out", help="cost report JSON")
    sp.add_argument("--log", help="local search progress CSV")
    sp.add_argument("--check", action="store_true",
                    help="recompute all costs after every local search move")

    sp = sub.add_parser("evaluate", help="cost report of an assignment")
    _common(sp, assignment=True)
    sp.add_argument("--csv", help="also write per-machine costs as CSV")

    sp = sub.add_parser("simulate", help="superstep cost simulation")
    _common(sp, assignment=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--dense", type=int, metavar="N", help="N supersteps, all vertices active")
    g.add_argument("--frontier", metavar="SRC", help="breadth-first levels from vertex SRC")
    sp.add_argument("--csv", help="also write per-superstep costs as CSV")

    sp = sub.add_parser("convert", help="turn an edge partition into a vertex partition")
    _common(sp, assignment=True)
    sp.add_argument("--out", default="-", help="vertex map file (vertex machine_id)")

    sp = sub.add_parser("generate", help="write an R-MAT graph")
    sp.add_argument("--scale", type=int, required=True)
    sp.add_argument("--edge-factor", type=float, default=16)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    return ap


def cmd_plan(a):
    g, f = _load_graph(a.graph, a.renumber), load_fleet(a.fleet)
    plan = make_plan(g, f, a.capacity)
    _write_json({"schema_version": SCHEMA_VERSION, **plan.to_dict()}, a.out)


def cmd_partition(a):
    g, f = _load_graph(a.graph, a.renumber), load_fleet(a.fleet)
    params = SlsParams(gamma=a.gamma, theta=a.theta, n0=a.n0, t0=a.t0, k=a.k,
                       alpha=a.alpha, beta=a.beta, objective=a.objective)
    cfg = RunConfig(a.method, a.capacity, a.seed, params, a.check, a.log)
    t = time.perf_counter()
    pt, plan = partition(g, f, cfg)
    elapsed = time.perf_counter() - t
    pt.validate(g, f)
    rep = cost_report(pt, f, g)
    write_assignment(g, pt, a.out)
    if a.plan_out:
        _write_json({"schema_version": SCHEMA_VERSION, **plan.to_dict()}, a.plan_out)
    if a.report_out:
        _write_json(rep.to_dict(), a.report_out)
    print(f"TC={rep.tc} RF={float(rep.rf):.4f}")
    print(f"partitioned {g.num_edges} edges onto {f.p} machines in {elapsed:.2f}s",
          file=sys.stderr)


def cmd_evaluate(a):
    g, f = _load_graph(a.graph, a.renumber), load_fleet(a.fleet)
    pt = read_assignment(a.assignment, g, f.p)
    rep = cost_report(pt, f, g)
    _write_json(rep.to_dict(), "-")
    if a.csv:
        with open(a.csv, "w") as fh:
            fh.write(rep.to_csv())


def cmd_simulate(a):
    g, f = _load_graph(a.graph, a.renumber), load_fleet(a.fleet)
    pt = read_assignment(a.assignment, g, f.p)
    if a.dense is not None:
        rep = simulate_dense(pt, f, g, a.dense)
    else:
        rep = simulate_frontier(pt, f, g, g.vertex_index(a.frontier))
    _write_json(rep.to_dict(), "-")
    if a.csv:
        with open(a.csv, "w") as fh:
            fh.write(rep.to_csv())


def cmd_convert(a):
    g, f = _load_graph(a.graph, a.renumber), load_fleet(a.fleet)
    pt = read_assignment(a.assignment, g, f.p)
    vp = to_vertex_partition(pt, f, g)
    if a.out == "-":
        for u, k in enumerate(vp.vertex_machine.tolist()):
            if k >= 0:
                print(f"{g.label(u)} {k + 1}")
    else:
        write_vertex_map(g, vp.vertex_machine, a.out)
    print(f"cut edges: {vp.cut_edges}" + (" (memory exceeded)" if vp.memory_exceeded else ""),
          file=sys.stderr)


def cmd_generate(a):
    g = generate_rmat(a.scale, a.edge_factor, a.seed)
    write_edge_list(g, a.out)
    print(f"|V|={g.num_vertices} |E|={g.num_edges}", file=sys.stderr)


COMMANDS = {
    "plan": cmd_plan,
    "partition": cmd_partition,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
    "convert": cmd_convert,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        COMMANDS[a.cmd](a)
    except HetpartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, OSError) else 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
