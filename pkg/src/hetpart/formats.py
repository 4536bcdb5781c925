"""Assignment and vertex-map files.

Assignment lines are ``u v machine_id`` with the graph's original vertex
tokens and 1-based machine ids.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import IntegrityError, ParseError, ValidationError
from .metrics import Partitioning


def write_assignment(g, pt: Partitioning, path) -> None:
    """One line per edge, machines in order, edges in insertion order."""
    with open(path, "w") as fh:
        for i, o in enumerate(pt.order):
            for e in o.tolist():
                fh.write(f"{g.label(g.src[e])} {g.label(g.dst[e])} {i + 1}\n")


def read_assignment(path, g, p: int) -> Partitioning:
    path = Path(path)
    order: list[list[int]] = [[] for _ in range(p)]
    seen = np.zeros(g.num_edges, dtype=bool)
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            toks = s.split()
            if len(toks) != 3:
                raise ParseError(f"expected 'u v machine_id', got {len(toks)} tokens", path, lineno)
            try:
                mid = int(toks[2])
            except ValueError:
                raise ParseError(f"bad machine id {toks[2]!r}", path, lineno) from None
            if not 1 <= mid <= p:
                raise ValidationError(f"{path}:{lineno}: machine id {mid} outside 1..{p}")
            try:
                u, v = g.vertex_index(toks[0]), g.vertex_index(toks[1])
            except ValidationError as exc:
                raise IntegrityError(f"{path}:{lineno}: {exc}") from None
            e = g.edge_index(u, v) if u != v else -1
            if e < 0:
                raise IntegrityError(f"{path}:{lineno}: ({toks[0]}, {toks[1]}) is not a graph edge")
            if seen[e]:
                raise IntegrityError(f"{path}:{lineno}: edge ({toks[0]}, {toks[1]}) listed twice")
            seen[e] = True
            order[mid - 1].append(e)
    if not seen.all():
        e = int(np.flatnonzero(~seen)[0])
        raise IntegrityError(f"edge ({g.label(g.src[e])}, {g.label(g.dst[e])}) is missing")
    return Partitioning.from_order(g.num_edges, order)


def write_vertex_map(g, vertex_machine, path) -> None:
    with open(path, "w") as fh:
        for u, k in enumerate(vertex_machine.tolist()):
            if k >= 0:
                fh.write(f"{g.label(u)} {k + 1}\n")
