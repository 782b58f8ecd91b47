from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from resfin import fixtures
from resfin.errors import NotFixed, OrbitLeavesPolytope
from resfin.measures import (affine_lift, barycentre, fixed_point_model, is_invariant_measure,
                             measure_to_model, product_measure)
from resfin.symbolic import bernoulli_model
from resfin.systems import PolytopeSystem, ShiftSystem
from resfin.words import FiniteQuotient
from resfin.zsystems import model_from_chains


def _wiring(model):
    perm_of = model.witness.action.generators
    for s in model.scope:
        cells = {}
        for a in model.atoms:
            cells.setdefault(model.cell(a), [set(), set()])[0].update(model.blocks[a])
            cells.setdefault(model.cell(a, (s,)), [set(), set()])[1].update(model.blocks[a])
        for left, right in cells.values():
            assert {perm_of[s - 1][i] for i in left} == right


def test_fair_coin_model():
    m = measure_to_model(ShiftSystem(1, 2), 0, product_measure([Fraction(1, 2)] * 2), Fraction(1, 2))
    assert m.scale == 4
    assert m.radius == 0
    assert m.witness.equivariance_defect == 0
    _wiring(m)


def test_irrational_weights_are_rounded():
    m = measure_to_model(ShiftSystem(1, 2), 0, product_measure([0.7071, 1 - 0.7071]), Fraction(1, 2))
    assert m.scale == 10
    assert sorted(m.weights.values()) == [Fraction(1, 10), Fraction(1, 5), Fraction(1, 5), Fraction(1, 2)]
    _wiring(m)


@settings(max_examples=15)
@given(st.integers(1, 9))
def test_rational_coin_models_are_exact(k):
    p = Fraction(k, 10)
    m = measure_to_model(ShiftSystem(1, 2), 1, product_measure([p, 1 - p]), Fraction(1, 2))
    _wiring(m)
    mu = product_measure([p, 1 - p])
    for a in m.atoms:
        mass = Fraction(len(m.blocks[a]), m.scale)
        assert abs(mass - mu(dict(zip(m.support, a)))) <= m.radius
    assert m.witness.equivariance_defect == 0


def test_free_group_model_wiring():
    m = measure_to_model(ShiftSystem(2, 2), 0, product_measure([Fraction(1, 2)] * 2), Fraction(1, 2))
    assert m.scale == 8
    _wiring(m)


@pytest.mark.parametrize("m", [2, 3])
def test_lift_does_not_increase_defect(m):
    bases = [bernoulli_model(2, FiniteQuotient.cyclic(3), Fraction(1, 2)),
             model_from_chains(fixtures.golden_rotation(55, 34), Fraction(1, 4))]
    for base in bases:
        lift = affine_lift(base, m)
        assert lift.defect <= lift.base_defect


def test_lift_size_counts_compositions():
    base = model_from_chains(fixtures.eight_cycle(), Fraction(1, 2))
    assert affine_lift(base, 2).action.size == 36


def test_square_rotation_fixed_point_model():
    square = PolytopeSystem([(0, 0), (1, 0), (0, 1), (1, 1)], [[0, -1], [1, 0]], [1, 0])
    fm = fixed_point_model(square, square.vertices, (Fraction(1, 2), Fraction(1, 2)), 16)
    assert fm.defect == Fraction(1, 32)
    assert fm.defect <= fm.bound


def test_contraction_orbit_leaves_interval():
    half = PolytopeSystem([(0,), (1,)], [[Fraction(1, 2)]], [0])
    with pytest.raises(OrbitLeavesPolytope):
        fixed_point_model(half, [(1,)], (0,), 4)


def test_non_fixed_point_rejected():
    square = PolytopeSystem([(0, 0), (1, 0), (0, 1), (1, 1)], [[0, -1], [1, 0]], [1, 0])
    with pytest.raises(NotFixed):
        fixed_point_model(square, square.vertices, (0, 0), 4)


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6), st.integers(1, 4), st.sampled_from([4, 16]))
def test_random_simplex_models_meet_bound(seed, dim, m):
    import numpy as np
    system, verts, w = fixtures.random_simplex_map(np.random.default_rng(seed), dim)
    assert is_invariant_measure([(v, Fraction(1, dim + 1)) for v in verts], system)
    assert barycentre([(v, Fraction(1, dim + 1)) for v in verts], system) == w
    fm = fixed_point_model(system, verts, w, m)
    assert fm.defect <= fm.bound
