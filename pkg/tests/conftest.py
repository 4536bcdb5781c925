import numpy as np
import pytest

from hetpart.graph import from_edges, load_edge_list
from hetpart.machines import Fleet, MachineSpec
from hetpart.metrics import Partitioning

EXAMPLE_EDGES = "a b\nb c\nc f\nd e\ne f\n"
EXAMPLE_FLEET = "m_node 1\nm_edge 2\n# id mem c_node c_edge c_com\n1 7 0 1 1\n2 7 0 2 2\n3 5 0 1 1\n"


@pytest.fixture
def example_files(tmp_path):
    g = tmp_path / "example.txt"
    g.write_text(EXAMPLE_EDGES)
    f = tmp_path / "fleet.txt"
    f.write_text(EXAMPLE_FLEET)
    return g, f


@pytest.fixture
def example(example_files):
    gpath, _ = example_files
    return load_edge_list(gpath, renumber=True)


@pytest.fixture
def fleet3():
    return Fleet([MachineSpec(1, 7, 0, 1, 1), MachineSpec(2, 7, 0, 2, 2),
                  MachineSpec(3, 5, 0, 1, 1)], m_node=1, m_edge=2)


def eid(g, a, b):
    e = g.edge_index(g.vertex_index(a), g.vertex_index(b))
    assert e >= 0
    return e


def assignment(g, groups):
    """Partitioning from lists of 'xy' edge names, one list per machine."""
    order = [[eid(g, s[0], s[1]) for s in grp] for grp in groups]
    return Partitioning.from_order(g.num_edges, order)


def names(g, edges):
    return sorted("".join(sorted((g.label(g.src[e]), g.label(g.dst[e])))) for e in edges)


def graph_of(pairs, n=None):
    u = [a for a, _ in pairs]
    v = [b for _, b in pairs]
    n = n if n is not None else max(u + v) + 1
    return from_edges(n, np.array(u), np.array(v))


def uniform_fleet(p, mem=10**9, c_node=1, c_edge=1, c_com=1):
    return Fleet([MachineSpec(i + 1, mem, c_node, c_edge, c_com) for i in range(p)], 1, 2)
