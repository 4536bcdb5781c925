import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetpart.errors import CapacityError, IntegrityError, InvariantError, ValidationError
from hetpart.graph import generate_rmat
from hetpart.machines import Fleet, MachineSpec
from hetpart.metrics import (Partitioning, cost_report, mapreduce_objective, replication_factor,
                             tc_com_rf_consistency)

from conftest import assignment, graph_of, uniform_fleet
from oracles import costs_by_definition

GOOD = [["ab", "bc"], ["de", "ef"], ["cf"]]
ALT = [["ab"], ["bc", "cf"], ["de", "ef"]]


def test_example_good(example, fleet3):
    rep = cost_report(assignment(example, GOOD), fleet3, example)
    assert rep.histogram() == [(2, 2), (4, 3), (1, 5)]
    assert rep.tc == 7
    assert rep.rf == Fraction(8, 6)
    assert [m.mem_used for m in rep.machines] == [7, 7, 4]


def test_example_alternative(example, fleet3):
    rep = cost_report(assignment(example, ALT), fleet3, example)
    assert rep.tc == 10 and rep.rf == Fraction(4, 3)
    assert [m.t_total for m in rep.machines] == [4, 10, 5]


def test_single_machine(example):
    f = uniform_fleet(1, c_node=2, c_edge=3)
    pt = Partitioning.from_assign(np.zeros(5, dtype=np.int32), 1)
    rep = cost_report(pt, f, example)
    assert rep.machines[0].t_com == 0
    assert rep.tc == 2 * 6 + 3 * 5
    assert replication_factor(pt, example) == 1
    assert mapreduce_objective(pt, f, example) == rep.tc


def test_full_overlap_rf():
    # a triangle split so that every vertex sits on all three machines
    g = graph_of([(0, 1), (1, 2), (0, 2)])
    pt = Partitioning.from_assign(np.array([0, 1, 2]), 3)
    assert replication_factor(pt, g) == 2
    star = graph_of([(0, 1), (0, 2)])
    pt = Partitioning.from_order(2, [[0, 1], []])
    assert replication_factor(pt, star) == 1


def test_mapreduce_example(example, fleet3):
    assert mapreduce_objective(assignment(example, GOOD), fleet3, example) == 9


def test_mapreduce_equals_tc_without_replicas():
    g = graph_of([(0, 1), (2, 3)])
    f = uniform_fleet(2)
    pt = Partitioning.from_assign(np.array([0, 1]), 2)
    rep = cost_report(pt, f, g)
    assert rep.tc_mr == rep.tc


def test_com_rf_identity_example(example):
    assert tc_com_rf_consistency(assignment(example, GOOD), example) == (4, 4)
    one = Partitioning.from_assign(np.zeros(5, dtype=np.int32), 1)
    assert tc_com_rf_consistency(one, example) == (0, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 5))
def test_com_rf_identity_random(seed, p):
    rng = np.random.default_rng(seed)
    pairs = rng.integers(0, 25, size=(50, 2))
    g = graph_of([tuple(x) for x in pairs.tolist()], n=25)
    pt = Partitioning.from_assign(rng.integers(0, p, g.num_edges), p)
    a, b = tc_com_rf_consistency(pt, g)
    assert a == b
    # brute-force pair enumeration; unit c_com charges 1 + 1 per ordered pair
    f = uniform_fleet(p, c_node=0, c_edge=1, c_com=1)
    assert sum(c for _, c in costs_by_definition(g, f, pt.assign)) == 2 * a


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_cost_report_matches_definition(seed, p):
    rng = np.random.default_rng(seed)
    g = graph_of([tuple(x) for x in rng.integers(0, 30, size=(60, 2)).tolist()], n=30)
    f = Fleet([MachineSpec(i + 1, 10**6, int(rng.integers(0, 9)), int(rng.integers(1, 9)),
                           int(rng.integers(0, 9))) for i in range(p)])
    pt = Partitioning.from_assign(rng.integers(0, p, g.num_edges), p)
    rep = cost_report(pt, f, g)
    assert rep.histogram() == costs_by_definition(g, f, pt.assign)
    assert rep.tc == max(m.t_cal + m.t_com for m in rep.machines)
    assert rep.tc_mr == max(m.t_cal for m in rep.machines) + max(m.t_com for m in rep.machines)
    covered = np.zeros(g.num_vertices, bool)
    covered[g.src] = covered[g.dst] = True
    if covered.all():
        assert rep.rf >= 1


def test_permutation_changes_tc_not_rf(example, fleet3):
    base = assignment(example, GOOD)
    rf0 = replication_factor(base, example)
    tcs = set()
    for perm in itertools.permutations(range(3)):
        pt = Partitioning.from_order(5, [base.order[k] for k in perm])
        assert replication_factor(pt, example) == rf0
        tcs.add(cost_report(pt, fleet3, example).tc)
    assert len(tcs) > 1


def test_report_is_pure(example, fleet3):
    pt = assignment(example, GOOD)
    assert cost_report(pt, fleet3, example).to_dict() == cost_report(pt, fleet3, example).to_dict()


def test_json_and_csv(example, fleet3):
    rep = cost_report(assignment(example, GOOD), fleet3, example)
    d = json.loads(rep.to_json())
    assert {"schema_version", "tc", "rf", "tc_mr", "per_machine"} <= set(d)
    assert d["per_machine"][2]["t_com"] == 5
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("machine,") and len(lines) == 4


def test_n_matrix(example):
    nm = assignment(example, GOOD).n_matrix(example)
    assert nm.tolist() == [[0, 0, 1], [0, 0, 1], [1, 1, 0]]


def test_integrity_errors(example, fleet3):
    with pytest.raises(IntegrityError):
        cost_report(Partitioning.from_assign(np.zeros(4, dtype=np.int32), 3), fleet3, example)
    with pytest.raises(IntegrityError):
        Partitioning.from_order(5, [[0, 1], [1]])
    with pytest.raises(ValidationError):
        Partitioning.from_assign([0, 3], 3)
    pt = Partitioning.from_assign(np.array([0, 0, 0, 0, -1]), 3)
    with pytest.raises(IntegrityError):
        pt.validate(example)


def test_validate_memory(example, fleet3):
    assignment(example, GOOD).validate(example, fleet3)
    with pytest.raises(InvariantError, match="machine 3"):
        assignment(example, ALT).validate(example, fleet3)


def test_overflow_guard():
    g = generate_rmat(6, 4, seed=0)
    f = Fleet([MachineSpec(1, 10**6, 0, 2**61, 1)])
    pt = Partitioning.from_assign(np.zeros(g.num_edges, dtype=np.int32), 1)
    with pytest.raises(CapacityError):
        cost_report(pt, f, g)


def test_float_costs(example):
    f = Fleet([MachineSpec(1, 100, 0.5, 1.5, 0.25), MachineSpec(2, 100, 0, 1, 1)])
    pt = Partitioning.from_order(5, [[0, 1, 2], [3, 4]])
    rep = cost_report(pt, f, example)
    assert rep.histogram() == pytest.approx(costs_by_definition(example, f, pt.assign))
