import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from resfin.errors import Inconclusive, Infinite, NotInvertible, SizeOverflow
from resfin.symbolic import (GroupRingElement, algebraic_fixed_points, algebraic_model_witness,
                             bareiss_det, bernoulli_model, circulant, periodic_solutions,
                             smith_normal_form)
from resfin.systems import AlgebraicSystem
from resfin.words import FiniteQuotient

int_matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)))


def _matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def _minor_gcd(m, k):
    """gcd of all k x k minors (the k-th determinantal divisor)."""
    g = 0
    rows, cols = len(m), len(m[0])
    for rs in combinations(range(rows), k):
        for cs in combinations(range(cols), k):
            g = math.gcd(g, bareiss_det([[m[i][j] for j in cs] for i in rs]))
    return g


@given(int_matrices)
def test_smith_form_is_a_unimodular_diagonalization(m):
    u, d, v = smith_normal_form(m)
    assert _matmul(_matmul(u, m), v) == d
    assert abs(bareiss_det(u)) == 1
    assert abs(bareiss_det(v)) == 1
    diag = [d[i][i] for i in range(min(len(m), len(m[0])))]
    assert all(d[i][j] == 0 for i in range(len(d)) for j in range(len(d[0])) if i != j)
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        assert (a == 0 and b == 0) or (a != 0 and b % a == 0)


@given(int_matrices)
def test_smith_diagonal_matches_determinantal_divisors(m):
    _, d, _ = smith_normal_form(m)
    diag = [d[i][i] for i in range(min(len(m), len(m[0])))]
    prod = 1
    for k, x in enumerate(diag, start=1):
        prod *= x
        assert prod == _minor_gcd(m, k)


@given(st.lists(st.lists(st.integers(-5, 5), min_size=4, max_size=4), min_size=4, max_size=4))
def test_bareiss_matches_float_determinant(m):
    assert bareiss_det(m) == round(np.linalg.det(np.array(m, dtype=float)))


def _fourier_order(f, n):
    val = 1.0
    for k in range(n):
        val *= abs(sum(c * np.exp(2j * np.pi * e * k / n) for e, c in f.items()))
    return val


@pytest.mark.parametrize("n", range(1, 11))
def test_multiplication_by_two_has_two_to_the_n_points(n):
    order, factors = algebraic_fixed_points({0: 2}, n)
    assert order == 2 ** n
    assert factors == (2,) * n


@pytest.mark.parametrize("n,expected,factors", [
    (1, 1, ()), (2, 5, (5,)), (3, 16, (4, 4)), (4, 45, (3, 15)), (5, 121, (11, 11)), (6, 320, (8, 40))])
def test_harmonic_model_counts(n, expected, factors):
    f = {0: 3, 1: -1, -1: -1}
    order, got = algebraic_fixed_points(f, n)
    assert order == expected
    assert got == factors
    assert abs(_fourier_order(f, n) - expected) < 1e-6


def test_singular_circulant_is_infinite():
    with pytest.raises(Infinite):
        algebraic_fixed_points({0: 1, 1: -1}, 3)


@given(st.integers(1, 5))
def test_periodic_solutions_are_fixed_and_complete(n):
    f = {0: 3, 1: -1, -1: -1}
    pts = periodic_solutions(f, n)
    xf = AlgebraicSystem(f)
    for p in pts:
        xf.check_point(p)
        assert xf.act((1,) * n, p) == p
    assert len(set(pts)) == algebraic_fixed_points(f, n)[0]


def test_circulant_layout():
    assert circulant({0: 3, 1: -1, -1: -1}, 3) == [[3, -1, -1], [-1, 3, -1], [-1, -1, 3]]
    assert circulant({1: 1}, 3) == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


def test_group_ring_multiplication():
    f = GroupRingElement.of({0: 1, 1: -1})
    g = GroupRingElement.of({0: 1, 1: 1})
    assert (f * g).as_dict() == {0: 1, 2: -1}


def test_algebraic_witness_densities_shrink():
    f = {0: 3, 1: -1, -1: -1}
    dens = [algebraic_model_witness(f, n, Fraction(1, 2)).density_defect for n in range(1, 7)]
    assert dens == sorted(dens, reverse=True)
    assert all(algebraic_model_witness(f, n, Fraction(1, 2)).equivariance_defect == 0 for n in (2, 3))


def test_fourier_precheck():
    with pytest.raises(NotInvertible):
        algebraic_model_witness({0: 1, 1: -1}, 3, Fraction(1, 2))
    with pytest.raises(Inconclusive):
        algebraic_model_witness({0: 1001, 1: -1000}, 3, Fraction(1, 2), margin=2)


@pytest.mark.parametrize("n", range(1, 10))
@pytest.mark.parametrize("r", range(1, 5))
def test_bernoulli_density_law(n, r):
    w = bernoulli_model(2, FiniteQuotient.cyclic(n), Fraction(1, 2 ** r))
    assert w.equivariance_defect == 0
    assert w.passed == (n >= 2 * r + 1)


def test_bernoulli_over_free_group_quotients():
    w = bernoulli_model(2, FiniteQuotient.product_of_cyclic([2, 2]), Fraction(1, 2))
    assert w.density_defect == Fraction(1, 2)
    assert bernoulli_model(2, FiniteQuotient.trivial(1), Fraction(1, 2)).action.size == 2
    with pytest.raises(SizeOverflow):
        bernoulli_model(2, FiniteQuotient.cyclic(20), Fraction(1, 2))
