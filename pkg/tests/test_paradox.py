from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from resfin import fixtures
from resfin.core import FiniteAction
from resfin.errors import StaleContext
from resfin.paradox import (ParadoxCertificate, boundary_context, compactified_context,
                            decide_paradoxical, equidecompose, finite_action_context,
                            invariant_measure_lp, shift_context, verify_certificate)


def test_boundary_of_free_group_is_paradoxical():
    ctx = boundary_context(2, 1, 2)
    assert invariant_measure_lp(ctx, ctx.source) is None
    cert = decide_paradoxical(ctx, ctx.source, 2, 1)
    assert (cert.k, cert.l) == (2, 1)
    assert verify_certificate(cert, ctx)


def test_certificate_from_other_context_is_stale():
    cert = decide_paradoxical(boundary_context(2, 1, 2), sorted(boundary_context(2, 1, 2).source), 2, 1)
    with pytest.raises(StaleContext):
        verify_certificate(cert, boundary_context(2, 2, 2))


def test_tampered_certificate_fails_recount():
    ctx = boundary_context(2, 1, 2)
    cert = decide_paradoxical(ctx, ctx.source, 2, 1)
    fewer = replace(cert, pieces=cert.pieces[1:])
    assert not verify_certificate(fewer, ctx)


@st.composite
def actions(draw):
    n = draw(st.integers(1, 6))
    rank = draw(st.integers(1, 2))
    gens = tuple(tuple(draw(st.permutations(range(n)))) for _ in range(rank))
    return FiniteAction(n, gens)


@settings(max_examples=30)
@given(actions())
def test_finite_actions_carry_the_uniform_measure(action):
    ctx = finite_action_context(action, 1)
    mu = invariant_measure_lp(ctx, ctx.source)
    assert set(mu.weights.values()) == {Fraction(1, action.size)}
    assert decide_paradoxical(ctx, ctx.source, 2, 1) is None
    # even without the measure check the search finds nothing: counting forbids it
    assert decide_paradoxical(ctx, ctx.source, 2, 1, measure_prune=False) is None


@pytest.mark.parametrize("entry", fixtures.bundled_contexts(), ids=lambda e: e[0])
def test_certificates_never_coexist_with_measures(entry):
    _, _, _, _, ctx = entry
    for A in [tuple(ctx.source)] + [(a,) for a in ctx.source]:
        cert = decide_paradoxical(ctx, A, 2, 1, measure_prune=False)
        if cert is not None:
            assert verify_certificate(cert, ctx)
            assert invariant_measure_lp(ctx, A) is None


def test_compactified_line_has_point_mass():
    ctx = compactified_context(fixtures.compactified_line(), 1, 1)
    mu = invariant_measure_lp(ctx, ctx.source)
    assert mu is not None
    assert sum(mu.weights.values()) == 1
    assert decide_paradoxical(ctx, ctx.source, 2, 1) is None


def test_shift_context_uniform_measure():
    ctx = shift_context(fixtures.full_shift(), 2, 1)
    mu = invariant_measure_lp(ctx, ctx.source)
    assert len(set(mu.weights.values())) == 1


def test_context_digest_is_stable():
    assert boundary_context(2, 1, 1).digest == boundary_context(2, 1, 1).digest
    assert boundary_context(2, 1, 1).digest != boundary_context(2, 1, 2).digest


def test_boundary_halves_are_equidecomposable():
    ctx = boundary_context(2, 1, 1)
    a, b, b_inv = (1,), (2,), (-2,)
    # a sends C(a) u C(b) u C(b^-1) onto C(a)
    pieces = equidecompose(ctx, {0: [a, b, b_inv]}, {0: [a]})
    assert pieces is not None
    covered = set()
    for s, n, m, atoms in pieces:
        covered |= atoms
    assert covered == ctx.union([a, b, b_inv])


def test_finite_equidecomposition_respects_counts():
    ctx = finite_action_context(FiniteAction.cycle(4), 1)
    assert equidecompose(ctx, {0: [0, 1]}, {0: [2, 3]}) is not None
    assert equidecompose(ctx, {0: [0, 1]}, {0: [2]}) is None


@pytest.mark.parametrize("window", [1, 2])
def test_boundary_paradox_persists_across_radii(window):
    found = []
    for radius in (1, 2, 3):
        ctx = boundary_context(2, window, radius)
        found.append(decide_paradoxical(ctx, tuple(ctx.source), 2, 1) is not None)
    assert found == [True, True, True]
