import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from resfin.core import (FiniteAction, SampleDistance, check_witness, empirical_measure, merge_local_witnesses,
                         ucp_defects, validate_action_description)
from resfin.errors import InvalidPoint, Mismatch, MetricError, NonBijective
from resfin.systems import (AlgebraicSystem, BoundaryPoint, BoundarySystem, CompactifiedZ,
                            FiniteSample, PeriodicPoint, PolytopeSystem, QuotientConfig, ShiftSystem,
                            config_distance, resolution_radius)
from resfin.words import FiniteQuotient


def test_resolution_radius():
    assert resolution_radius(Fraction(1, 2)) == 1
    assert resolution_radius(Fraction(1, 3)) == 2
    assert resolution_radius(Fraction(1, 4)) == 2


def test_triangle_violation_names_triple():
    with pytest.raises(MetricError) as info:
        FiniteSample.from_tables([[0, 1, 5], [1, 0, 1], [5, 1, 0]], images=[[0, 1, 2]])
    assert info.value.triple == (0, 1, 2)


def test_asymmetric_table_rejected():
    with pytest.raises(MetricError):
        FiniteSample.from_tables([[0, 1], [2, 0]], images=[[0, 1]])


def test_circle_arc_unit_is_exact():
    c = FiniteSample.circle(8, 1)
    step = Fraction(math.floor(2 * math.pi / 8 * 10 ** 6), 10 ** 6)
    assert c.distance(0, 4) == 4 * step
    assert abs(float(c.distance(0, 4)) - math.pi) < 8e-6
    assert c.act((1,), 7) == 0
    assert c.act((-1,), 0) == 7


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=7, unique=True), st.randoms())
def test_line_samples_with_permutations_model_themselves(xs, rnd):
    n = len(xs)
    perm = list(range(n))
    rnd.shuffle(perm)
    sample = FiniteSample.from_tables([[abs(a - b) for b in xs] for a in xs], images=[perm])
    w = check_witness(sample, FiniteAction(n, (tuple(perm),)), range(n), epsilon=Fraction(1, 2))
    assert w.density_defect == 0
    assert w.equivariance_defect == 0
    assert w.passed


@given(st.lists(st.integers(0, 9), min_size=1, max_size=5))
def test_density_defect_shrinks_as_points_are_added(extra):
    c = FiniteSample.circle(10, 1)
    pts = [0]
    last = c.density_defect(pts)
    for p in extra:
        pts.append(p)
        now = c.density_defect(pts)
        assert now <= last
        last = now


def test_shift_distance_on_periodic_points():
    x = QuotientConfig.periodic((0, 1))
    y = QuotientConfig.periodic((0, 0))
    z = QuotientConfig.periodic((0, 1, 0, 0, 0, 1))
    assert config_distance(x, x) == 0
    assert config_distance(x, y) == Fraction(1, 2)
    # first disagreement at |g| = 3
    assert config_distance(x, z) == Fraction(1, 8)


def test_shift_action_translates_coloring():
    shift = ShiftSystem(1, 2)
    x = QuotientConfig.periodic((1, 0, 0))
    # (s x)_g = x_{s^-1 g}
    sx = shift.act((1,), x)
    assert sx.value((1,)) == x.value(())


def test_forbidden_pattern_rejects_point():
    golden = ShiftSystem(1, 2, ((((), 1), ((1,), 1)),))
    golden.check_point(QuotientConfig.periodic((0, 1)))
    with pytest.raises(InvalidPoint):
        golden.check_point(QuotientConfig.periodic((1, 1, 0)))


def test_boundary_metric_and_action():
    b = BoundarySystem(2)
    x = BoundaryPoint((1, 2), (1,))
    y = BoundaryPoint((1, -2), (1,))
    assert b.distance(x, y) == Fraction(1, 2)
    assert b.distance(x, x) == 0
    assert b.act((-1,), x) == BoundaryPoint((2,), (1,))


def test_compactified_distances():
    line = CompactifiedZ([("-inf", "+inf")])
    assert line.distance((0, 0), "+inf") == 1
    assert line.distance("-inf", "+inf") == 2
    loop = CompactifiedZ([("y0", "y1"), ("y1", "y2"), ("y2", "y0")])
    assert loop.distance((0, 5), (1, -5)) == Fraction(1, 3)
    assert loop.act((1, 1), (2, 3)) == (2, 5)
    assert loop.act((1,), "y1") == "y1"


def test_polytope_rejects_escaping_map():
    with pytest.raises(InvalidPoint):
        PolytopeSystem([(0,), (1,)], [[2]], [0])
    square = PolytopeSystem([(0, 0), (1, 0), (0, 1), (1, 1)], [[0, -1], [1, 0]], [1, 0])
    assert square.map((Fraction(1, 2), Fraction(1, 2))) == (Fraction(1, 2), Fraction(1, 2))
    assert square.contains((Fraction(1, 3), 1))
    assert not square.contains((2, 0))


def test_algebraic_points_must_be_annihilated():
    xf = AlgebraicSystem({0: 3, 1: -1, -1: -1})
    # x_{k+1} = 3 x_k - x_{k-1} from (0, 1/11); the recursion closes up since 55/11 is an integer
    x = PeriodicPoint((Fraction(0), Fraction(1, 11), Fraction(3, 11), Fraction(8, 11), Fraction(21, 11)))
    assert all((3 * x.values[k] - x.values[(k + 1) % 5] - x.values[k - 1]) % 1 == 0 for k in range(5))
    xf.check_point(x)
    with pytest.raises(InvalidPoint):
        xf.check_point(PeriodicPoint((Fraction(1, 3),)))


def test_finite_action_validation():
    with pytest.raises(NonBijective) as info:
        validate_action_description(3, [[0, 1, 2], [0, 0, 1]])
    assert info.value.index == 1
    a = FiniteAction(4, ((1, 2, 3, 0), (1, 0, 3, 2)))
    # a 4-cycle and a reflection generate the dihedral group of order 8
    assert a.group_order() == 8
    assert a.act((1, 1, 1, 1), 2) == 2
    assert a.act((-1,), 0) == 3


def test_rank_mismatch_and_merge_rules():
    c = FiniteSample.circle(8, 1)
    with pytest.raises(Mismatch):
        check_witness(c, FiniteAction(8, (tuple(range(8)), tuple(range(8)))), range(8))
    w1 = check_witness(c, FiniteAction.cycle(4), [0, 1, 2, 3], scope=(1,))
    w2 = check_witness(c, FiniteAction.cycle(4), [4, 5, 6, 7], scope=(1,))
    merged = merge_local_witnesses([w1, w2])
    assert merged.action.size == 8
    assert merged.density_defect == 0
    assert merged.equivariance_defect == max(w1.equivariance_defect, w2.equivariance_defect)
    w3 = check_witness(c, FiniteAction.cycle(4), [0, 1, 2, 3], epsilon=Fraction(1, 4))
    with pytest.raises(Mismatch):
        merge_local_witnesses([w1, w3])


def test_exact_rotation_has_invariant_empirical_measure():
    c = FiniteSample.circle(8, 1)
    w = check_witness(c, FiniteAction(8, (tuple((i + 1) % 8 for i in range(8)),)), range(8))
    mu, defect, _ = empirical_measure(w)
    assert defect == 0
    mult, norm, equi = ucp_defects(w, [SampleDistance(c, j) for j in range(8)])
    assert mult == 0
    assert equi == 0


def test_quotient_config_points_from_ball_quotient():
    q = FiniteQuotient.ball_quotient(2, 1)
    x = QuotientConfig(q, tuple(i % 2 for i in range(q.order)))
    ShiftSystem(2, 2).check_point(x)
