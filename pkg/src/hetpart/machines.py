"""Heterogeneous fleet description and derived unit costs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class MachineSpec:
    id: int
    mem: float
    c_node: float
    c_edge: float
    c_com: float


@dataclass(frozen=True)
class Fleet:
    machines: tuple[MachineSpec, ...]
    m_node: float = 1
    m_edge: float = 2

    def __post_init__(self):
        object.__setattr__(self, "machines", tuple(self.machines))
        validate_fleet(self)

    @property
    def p(self) -> int:
        return len(self.machines)

    def column(self, name: str) -> np.ndarray:
        """One cost/memory attribute over all machines.

        int64 when every value in the fleet is integral, float64 otherwise,
        so that cost arithmetic stays exact for integer fleets.
        """
        vals = [getattr(m, name) for m in self.machines]
        return np.asarray(vals, dtype=self.dtype)

    @property
    def dtype(self):
        vals = [self.m_node, self.m_edge]
        for m in self.machines:
            vals += [m.mem, m.c_node, m.c_edge, m.c_com]
        if all(float(v).is_integer() and abs(v) < 2**62 for v in vals):
            return np.int64
        return np.float64

    def subset(self, indices) -> "Fleet":
        ms = [self.machines[i] for i in indices]
        renum = [MachineSpec(k + 1, m.mem, m.c_node, m.c_edge, m.c_com) for k, m in enumerate(ms)]
        return Fleet(renum, self.m_node, self.m_edge)

    def to_dict(self) -> dict:
        return {
            "m_node": self.m_node,
            "m_edge": self.m_edge,
            "machines": [vars(m) for m in self.machines],
        }


def validate_fleet(f: Fleet) -> None:
    if not f.machines:
        raise ValidationError("fleet has no machines")
    if f.m_node < 0:
        raise ValidationError("m_node must be >= 0")
    if f.m_edge <= 0:
        raise ValidationError("m_edge must be > 0")
    ids = [m.id for m in f.machines]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise ValidationError(f"duplicate machine id {dup}")
    if sorted(ids) != list(range(1, len(ids) + 1)):
        raise ValidationError(f"machine ids must be 1..{len(ids)} without gaps")
    if ids != sorted(ids):
        raise ValidationError("machines must be listed in id order")
    for m in f.machines:
        if not m.mem > 0:
            raise ValidationError(f"machine {m.id}: mem must be > 0")
        if not m.c_edge > 0:
            raise ValidationError(f"machine {m.id}: c_edge must be > 0")
        if m.c_node < 0 or m.c_com < 0:
            raise ValidationError(f"machine {m.id}: costs must be >= 0")


def _number(tok: str, path, lineno):
    try:
        x = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", path, lineno) from None
    return int(x) if x.is_integer() else x


def load_fleet(path) -> Fleet:
    """Read a fleet file (text or JSON, chosen by content).

    Text format::

        m_node 1
        m_edge 2
        # id mem c_node c_edge c_com
        1 7 0 1 1
    """
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
            machines = [
                MachineSpec(int(m["id"]), m["mem"], m["c_node"], m["c_edge"], m["c_com"])
                for m in data["machines"]
            ]
            return Fleet(machines, data.get("m_node", 1), data.get("m_edge", 2))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ParseError(f"bad fleet JSON: {exc}", path) from None
    header = {"m_node": 1, "m_edge": 2}
    machines = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        toks = s.split()
        if toks[0] in header:
            if len(toks) != 2:
                raise ParseError(f"expected '{toks[0]} <value>'", path, lineno)
            header[toks[0]] = _number(toks[1], path, lineno)
            continue
        if len(toks) != 5:
            raise ParseError("expected 'id mem c_node c_edge c_com'", path, lineno)
        vals = [_number(t, path, lineno) for t in toks]
        machines.append(MachineSpec(int(vals[0]), *vals[1:]))
    machines.sort(key=lambda m: m.id)
    return Fleet(machines, header["m_node"], header["m_edge"])


def write_fleet(f: Fleet, path) -> None:
    lines = [f"m_node {f.m_node}", f"m_edge {f.m_edge}", "# id mem c_node c_edge c_com"]
    lines += [f"{m.id} {m.mem} {m.c_node} {m.c_edge} {m.c_com}" for m in f.machines]
    Path(path).write_text("\n".join(lines) + "\n")


def vertex_ratio(num_vertices: int, num_edges: int) -> Fraction:
    if num_edges <= 0:
        raise ValidationError("graph has no edges")
    return Fraction(num_vertices, num_edges)


def effective_costs(f: Fleet, g) -> list:
    """``C_i = c_edge + (|V|/|E|) c_node`` per machine, as exact fractions."""
    r = vertex_ratio(g.num_vertices, g.num_edges)
    return [Fraction(m.c_edge) + r * Fraction(m.c_node) for m in f.machines]


def memory_feasible(f: Fleet, i: int, nv: int, ne: int) -> bool:
    """Whether machine ``i`` (0-based) can hold ``nv`` vertices and ``ne`` edges."""
    m = f.machines[i]
    return f.m_node * nv + f.m_edge * ne <= m.mem


def two_type_fleet(num_vertices, num_edges, n_super=10, n_normal=20, headroom=2.25,
                   m_node=1, m_edge=2) -> Fleet:
    """Super/normal fleet with the 10:3 memory split of the reference setup.

    Costs are (c_node, c_edge, c_com) = (10, 15, 15) for super machines and
    (5, 10, 10) for normal ones.  Memories are scaled so the whole fleet
    holds ``headroom`` times what the graph needs.
    """
    need = m_edge * num_edges + m_node * num_vertices
    unit = headroom * need / (10 * n_super + 3 * n_normal)
    ms = []
    for k in range(n_super + n_normal):
        if k < n_super:
            ms.append(MachineSpec(k + 1, int(np.ceil(10 * unit)), 10, 15, 15))
        else:
            ms.append(MachineSpec(k + 1, int(np.ceil(3 * unit)), 5, 10, 10))
    return Fleet(ms, m_node, m_edge)
