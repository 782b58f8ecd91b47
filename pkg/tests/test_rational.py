from fractions import Fraction
from itertools import combinations

from hypothesis import given, strategies as st

from resfin.rational import (as_fraction, common_denominator, format_fraction, linprog_exact,
                             nullspace, rref, solve_feasible)

small = st.integers(-4, 4)


def matrices(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def test_as_fraction_reads_strings_exactly():
    assert as_fraction("3/7") == Fraction(3, 7)
    assert as_fraction(" -2 ") == -2
    assert as_fraction(0.5) == Fraction(1, 2)
    assert format_fraction(Fraction(6, 4)) == "3/2"


def test_common_denominator():
    assert common_denominator([Fraction(1, 4), Fraction(1, 6), 3]) == 12


@given(matrices(3, 5))
def test_nullspace_vectors_are_annihilated(m):
    basis, free = nullspace(m, 5)
    _, piv = rref(m, 5)
    assert len(basis) == 5 - len(piv)
    for v in basis:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in m)


def _vertex_optimum(c, a, b, n):
    """Best basic feasible solution by enumerating column subsets."""
    best = None
    for k in range(1, len(a) + 1):
        for cols in combinations(range(n), k):
            sub = [[row[j] for j in cols] + [rhs] for row, rhs in zip(a, b)]
            red, piv = rref(sub)
            if k in piv or len(piv) != k:
                continue
            x = [Fraction(0)] * n
            for row, p in zip(red, piv):
                x[cols[p]] = row[-1]
            if any(v < 0 for v in x):
                continue
            if any(sum(r[j] * x[j] for j in range(n)) != rhs for r, rhs in zip(a, b)):
                continue
            val = sum(ci * xi for ci, xi in zip(c, x))
            best = val if best is None else min(best, val)
    return best


@given(matrices(2, 4), st.lists(small, min_size=2, max_size=2), st.lists(small, min_size=4, max_size=4))
def test_simplex_matches_vertex_enumeration(a, b, c):
    # the simplex constraint sum x = 1 keeps the problem bounded
    a = a + [[1] * 4]
    b = b + [1]
    status, x, val = linprog_exact(c, a, b, 4)
    oracle = _vertex_optimum(c, a, b, 4)
    if oracle is None:
        assert status == "infeasible"
    else:
        assert status == "optimal"
        assert val == oracle
        assert all(v >= 0 for v in x)


def test_unbounded_and_infeasible():
    assert linprog_exact([-1, 0], [[1, -1]], [0], 2)[0] == "unbounded"
    assert linprog_exact([0, 0], [[1, 1]], [-1], 2)[0] == "infeasible"
    assert solve_feasible([[1, 1]], [2], 2) is not None
