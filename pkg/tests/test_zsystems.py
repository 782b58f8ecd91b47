from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from resfin import fixtures
from resfin.errors import NoChain, NonInvertible
from resfin.systems import CompactifiedZ, FiniteSample
from resfin.zsystems import (EpsGraph, brute_force_recurrent, build_eps_graph, chain_recurrent_set,
                             find_compressible_clopen, model_from_chains, recurrence_scan)


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 9))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    return EpsGraph(tuple(range(n)), tuple(sorted(set(edges))), Fraction(1, 2))


@given(graphs())
def test_recurrent_set_agrees_with_path_enumeration(g):
    assert chain_recurrent_set(g) == brute_force_recurrent(g)


@given(graphs())
def test_recurrent_nodes_lie_on_cycles(g):
    rec = chain_recurrent_set(g)
    nxg = g.to_networkx()
    for v in rec:
        assert nxg.has_edge(v, v) or any(nx.has_path(nxg, w, v) for w in nxg.successors(v))


def test_path_graph_has_no_recurrence():
    g = EpsGraph((0, 1, 2), ((0, 1), (1, 2)), Fraction(1, 2))
    assert chain_recurrent_set(g) == frozenset()


def test_eps_graph_edges_follow_the_map():
    c = FiniteSample.circle(8, 1)
    g = build_eps_graph(c, Fraction(1, 2))
    assert set(g.edges) == {(i, (i + 1) % 8) for i in range(8)}


def test_eight_cycle_model_is_exact():
    w = model_from_chains(fixtures.eight_cycle(), Fraction(1, 2))
    assert w.action.size == 8
    assert w.density_defect == 0
    assert w.equivariance_defect == 0


@pytest.mark.parametrize("name,sample,eps", fixtures.chain_fixtures())
def test_chain_models_are_equivariant(name, sample, eps):
    w = model_from_chains(sample, eps)
    assert w.equivariance_defect < eps


def test_acyclic_sample_raises():
    sample = CompactifiedZ([("-inf", "+inf")]).sample(3)
    # drop the fixed points: the rest only drifts to the right
    pts = list(range(2, sample.size))
    num = sample.num[np.ix_(pts, pts)]
    img = sample.image_num[0][np.ix_(pts, pts)]
    drift = FiniteSample(num, sample.den, (None,), (img,))
    with pytest.raises(NoChain):
        model_from_chains(drift, Fraction(1, 100))


def test_compressible_set_on_compactified_line():
    u = find_compressible_clopen(fixtures.compactified_line(), 1)
    assert u.atoms == (("pt", 0, 0), ("nbhd", "+inf"))


@pytest.mark.parametrize("window", [1, 2, 3])
def test_full_shift_has_no_compressible_set(window):
    assert find_compressible_clopen(fixtures.full_shift(), window) is None


def test_glued_loop_has_no_compressible_set_at_window_1():
    assert find_compressible_clopen(fixtures.glued_loop(3), 1) is None


def test_golden_mean_shift_is_not_compressible():
    assert find_compressible_clopen(fixtures.golden_mean_shift(), 2) is None


def test_recurrence_scan_on_golden_rotation():
    rec = recurrence_scan(fixtures.golden_rotation(), 0, Fraction(1, 20), 1, 200)
    assert (rec.n, rec.m) == (1, 88)


def test_recurrence_scan_gives_up_on_translation():
    assert recurrence_scan(fixtures.compactified_line(), (0, 0), Fraction(1, 4), 1, 30) is None


def test_recurrence_scan_needs_inverse():
    ns = fixtures.north_south(16)
    with pytest.raises(NonInvertible):
        recurrence_scan(ns, 0, Fraction(1, 4), 1, 10)


@given(st.integers(3, 40), st.integers(1, 39))
def test_rotation_returns_within_its_period(q, p):
    c = FiniteSample.circle(q, p % q)
    rec = recurrence_scan(c, 0, Fraction(1, 10 ** 7), 1, q)
    assert rec is not None
    assert (p * (rec.n + rec.m)) % q == 0
