"""Undirected graphs in CSR form: loading, writing, R-MAT generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .errors import CapacityError, ParseError, ValidationError

# neighbor / edge-id arrays are int32
MAX_ADJACENCY = np.iinfo(np.int32).max

# Graph500 Kronecker initiator
RMAT_A, RMAT_B, RMAT_C = 0.57, 0.19, 0.19


@dataclass
class LoadReport:
    lines: int = 0
    self_loops: int = 0
    duplicates: int = 0


@dataclass(eq=False)
class Graph:
    """Immutable undirected simple graph.

    Each undirected edge has a dense id ``e`` with endpoints
    ``src[e] < dst[e]``; ids follow the lexicographic order of
    ``(src, dst)``.  The adjacency of every vertex is sorted by neighbor id
    and ``edge_ids`` gives the edge id of each adjacency slot, shared by the
    two mirror slots.
    """

    num_vertices: int
    num_edges: int
    offsets: np.ndarray
    neighbors: np.ndarray
    edge_ids: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    labels: list[str] | None = None
    report: LoadReport = field(default_factory=LoadReport)

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.offsets)

    def deg(self, u: int) -> int:
        self._check_vertex(u)
        return int(self.offsets[u + 1] - self.offsets[u])

    def label(self, u: int) -> str:
        return self.labels[u] if self.labels is not None else str(u)

    def vertex_index(self, token: str) -> int:
        """Map an external vertex token back to its dense id."""
        if self.labels is None:
            try:
                u = int(token)
            except ValueError:
                raise ValidationError(f"unknown vertex {token!r}") from None
            if not 0 <= u < self.num_vertices:
                raise ValidationError(f"unknown vertex {token!r}")
            return u
        if not hasattr(self, "_index"):
            self._index = {t: i for i, t in enumerate(self.labels)}
        try:
            return self._index[token]
        except KeyError:
            raise ValidationError(f"unknown vertex {token!r}") from None

    def edge_index(self, u: int, v: int) -> int:
        """Edge id of ``{u, v}``, or -1 if absent."""
        if u > v:
            u, v = v, u
        lo, hi = self.offsets[u], self.offsets[u + 1]
        k = lo + np.searchsorted(self.neighbors[lo:hi], v)
        if k < hi and self.neighbors[k] == v:
            return int(self.edge_ids[k])
        return -1

    def _check_vertex(self, u):
        if not 0 <= u < self.num_vertices:
            raise IndexError(f"vertex {u} out of range [0, {self.num_vertices})")


def neighbors(g: Graph, u: int) -> list[tuple[int, int]]:
    """``N(u)`` in ascending neighbor order as ``(vertex, edge id)`` pairs."""
    g._check_vertex(u)
    lo, hi = g.offsets[u], g.offsets[u + 1]
    return list(zip(g.neighbors[lo:hi].tolist(), g.edge_ids[lo:hi].tolist()))


@numba.njit(cache=True)
def _fill_csr(n, src, dst):
    m = src.shape[0]
    offsets = np.zeros(n + 1, dtype=np.int64)
    for e in range(m):
        offsets[src[e] + 1] += 1
        offsets[dst[e] + 1] += 1
    for u in range(n):
        offsets[u + 1] += offsets[u]
    pos = offsets[:-1].copy()
    nbrs = np.empty(2 * m, dtype=np.int32)
    eids = np.empty(2 * m, dtype=np.int32)
    # edges sorted by (src, dst) with src < dst: visiting them in order
    # appends every adjacency list in ascending neighbor order
    for e in range(m):
        u = src[e]
        v = dst[e]
        nbrs[pos[u]] = v
        eids[pos[u]] = e
        pos[u] += 1
        nbrs[pos[v]] = u
        eids[pos[v]] = e
        pos[v] += 1
    return offsets, nbrs, eids


def from_edges(num_vertices, u, v, labels=None, report=None) -> Graph:
    """Build a graph from raw endpoint arrays (self-loops and repeats dropped)."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if u.shape != v.shape:
        raise ValidationError("endpoint arrays differ in length")
    report = report or LoadReport(lines=len(u))
    loops = u == v
    report.self_loops += int(loops.sum())
    lo = np.minimum(u, v)[~loops]
    hi = np.maximum(u, v)[~loops]
    if len(lo) and (lo.min() < 0 or hi.max() >= num_vertices):
        raise ValidationError("vertex id out of range")
    keys = np.unique(lo * np.int64(num_vertices) + hi)
    report.duplicates += len(lo) - len(keys)
    m = len(keys)
    if 2 * m > MAX_ADJACENCY:
        raise CapacityError(f"{m} edges exceed the adjacency index budget")
    src = (keys // num_vertices).astype(np.int32)
    dst = (keys % num_vertices).astype(np.int32)
    del keys
    offsets, nbrs, eids = _fill_csr(num_vertices, src, dst)
    return Graph(num_vertices, m, offsets, nbrs, eids, src, dst, labels, report)


def load_edge_list(path, renumber: bool = False) -> Graph:
    """Read a whitespace-separated edge list; ``#`` lines are comments.

    Without ``renumber`` tokens must be non-negative integers and are used
    as vertex ids directly.  With ``renumber`` any token is accepted and
    ids are assigned in first-seen order; the tokens are kept as labels.
    """
    path = Path(path)
    us, vs = [], []
    index: dict[str, int] = {}
    labels: list[str] = []
    report = LoadReport()
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            toks = s.split()
            if len(toks) != 2:
                raise ParseError(f"expected 2 tokens, got {len(toks)}", path, lineno)
            report.lines += 1
            if renumber:
                for t in toks:
                    if t not in index:
                        index[t] = len(labels)
                        labels.append(t)
                us.append(index[toks[0]])
                vs.append(index[toks[1]])
            else:
                try:
                    a, b = int(toks[0]), int(toks[1])
                except ValueError:
                    raise ParseError(f"non-integer vertex in {s!r}", path, lineno) from None
                if a < 0 or b < 0:
                    raise ParseError(f"negative vertex id in {s!r}", path, lineno)
                us.append(a)
                vs.append(b)
    if renumber:
        n = len(labels)
    else:
        n = max(max(us, default=-1), max(vs, default=-1)) + 1
    g = from_edges(n, us, vs, labels if renumber else None, report)
    if g.num_edges == 0:
        raise ParseError("graph has no edges", path)
    return g


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w") as fh:
        if g.labels is None:
            np.savetxt(fh, np.column_stack([g.src, g.dst]), fmt="%d")
        else:
            lab = g.labels
            fh.writelines(f"{lab[a]} {lab[b]}\n" for a, b in zip(g.src.tolist(), g.dst.tolist()))


def generate_rmat(scale: int, edge_factor: float = 16, seed: int = 0) -> Graph:
    """Graph500-style Kronecker graph with ``2**scale`` vertices.

    Draws ``edge_factor * 2**scale`` endpoint pairs with the Graph500
    initiator, permutes vertex labels, then removes self-loops and repeats.
    """
    if scale < 2:
        raise ValidationError("scale must be >= 2")
    if edge_factor < 1:
        raise ValidationError("edge_factor must be >= 1")
    n = 1 << scale
    m = int(edge_factor * n)
    if 2 * m > MAX_ADJACENCY or scale > 31:
        raise CapacityError(f"scale {scale} exceeds the adjacency index budget")
    rng = np.random.default_rng(seed)
    ab = RMAT_A + RMAT_B
    c_norm = RMAT_C / (1.0 - ab)
    a_norm = RMAT_A / ab
    u = np.zeros(m, dtype=np.int64)
    v = np.zeros(m, dtype=np.int64)
    for bit in range(scale):
        ii = rng.random(m, dtype=np.float32) > ab
        thresh = np.where(ii, np.float32(c_norm), np.float32(a_norm))
        jj = rng.random(m, dtype=np.float32) > thresh
        del thresh
        u |= ii.astype(np.int64) << bit
        v |= jj.astype(np.int64) << bit
        del ii, jj
    perm = rng.permutation(n)
    u = perm[u]
    v = perm[v]
    return from_edges(n, u, v)
