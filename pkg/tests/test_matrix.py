import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resfin import fixtures
from resfin.core import FiniteAction
from resfin.errors import (CascadeExceeded, DeltaExceeded, HypothesisError, PlacementError, Singular,
                           SpectralGap, ThresholdExceeded, TraceMismatch)
from resfin.matrix import (OrbitRepresentation, berg_projection, cut_projection, encode_action, extract_finite_action,
                           match_permutation, opnorm, orthogonalize_family, polar_unitary,
                           round_to_projection, threshold_value)

seeds = st.integers(0, 2 ** 32 - 1)


def _herm(rng, d, size):
    e = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    e = (e + e.conj().T) / 2
    return e * size / opnorm(e)


def _random_projection(rng, d, k):
    u, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return u[:, :k] @ u[:, :k].conj().T


@given(seeds, st.integers(2, 12), st.floats(0, 0.2))
def test_rounding_returns_nearby_projection(seed, d, size):
    rng = np.random.default_rng(seed)
    p = _random_projection(rng, d, int(rng.integers(0, d + 1)))
    a = p + _herm(rng, d, size)
    q = round_to_projection(a)
    assert opnorm(q @ q - q) < 1e-10
    assert opnorm(q - p) <= 2 * size + 1e-9


def test_rounding_refuses_eigenvalue_at_half():
    with pytest.raises(SpectralGap):
        round_to_projection(np.diag([0.5, 1.0]))


def test_cut_in_the_plane():
    th = 0.01
    p = np.diag([1.0, 0.0])
    v = np.array([math.sin(th), math.cos(th)])
    q2, rep = cut_projection(p, np.outer(v, v), report=True)
    assert np.allclose(q2, np.diag([0.0, 1.0]))
    assert rep.shift <= 6 * rep.delta
    assert abs(rep.delta - math.sin(th) * 1) < 1e-12 or rep.delta <= math.sin(th) + 1e-12


@settings(max_examples=40)
@given(seeds, st.integers(2, 16), st.floats(0, 0.05))
def test_cut_bounds(seed, d, tilt):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, d))
    u, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    p = u[:, :k] @ u[:, :k].conj().T
    vecs = u[:, k:] [:, :int(rng.integers(1, d - k + 1))]
    vecs = vecs + tilt * (u[:, :k] @ rng.standard_normal((k, vecs.shape[1])))
    basis, _ = np.linalg.qr(vecs)
    q = basis @ basis.conj().T
    delta = opnorm(p @ q)
    if delta >= 0.1:
        with pytest.raises(DeltaExceeded):
            cut_projection(p, q)
        return
    q2, rep = cut_projection(p, q, report=True)
    assert opnorm(q2 @ q2 - q2) < 1e-10
    assert opnorm(p @ q2) < 1e-10
    assert rep.q_minus_a <= 3 * delta + 1e-10
    assert rep.a_defect <= 9 * delta + 1e-10
    assert opnorm(q2 - q) <= 6 * delta + 1e-10


@settings(max_examples=30)
@given(seeds, st.integers(2, 5), st.floats(0, 2e-3))
def test_orthogonalized_family_is_partition(seed, n, noise):
    rng = np.random.default_rng(seed)
    d = 4 * n
    exact = [np.diag([1.0 if i % n == k else 0.0 for i in range(d)]) for k in range(n)]
    fam = [e + _herm(rng, d, noise) for e in exact[:-1]]
    fam.append(np.eye(d) - sum(fam))
    out, rep = orthogonalize_family(fam, report=True)
    assert opnorm(sum(out) - np.eye(d)) < 1e-10
    for i, p in enumerate(out):
        assert opnorm(p @ p - p) < 1e-10
        for q in out[i + 1:]:
            assert opnorm(p @ q) < 1e-9
    assert rep.max_deviation <= rep.bound + 1e-9


def test_orthogonalize_names_violated_condition():
    d = 4
    with pytest.raises(CascadeExceeded, match="sum"):
        orthogonalize_family([np.eye(d) * 0.5, np.eye(d) * 0.4])
    with pytest.raises(CascadeExceeded, match="1/4"):
        orthogonalize_family([np.eye(d) * 0.5, np.eye(d) * 0.5], sum_tol=1)


@given(seeds, st.integers(1, 10), st.floats(0, 0.3))
def test_polar_factor_is_close(seed, d, size):
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    e = rng.standard_normal((d, d))
    raw = u + size * e / max(opnorm(e), 1e-12)
    try:
        v = polar_unitary(raw)
    except Singular:
        return
    assert opnorm(v @ v.conj().T - np.eye(d)) < 1e-10
    assert opnorm(v - raw) <= opnorm(raw @ raw.conj().T - np.eye(d)) + 1e-12


def test_polar_rejects_singular():
    with pytest.raises(Singular):
        polar_unitary(np.diag([1.0, 0.0]))


def test_match_permutation_and_trace_mismatch():
    P = [np.diag([1, 1, 0]), np.diag([0, 0, 1])]
    Q = [np.diag([0, 1, 1]), np.diag([1, 0, 0])]
    w, perm = match_permutation(P, Q)
    assert perm == (1, 2, 0)
    for p, q in zip(P, Q):
        assert (w @ p @ w.T == q).all()
    with pytest.raises(TraceMismatch) as info:
        match_permutation(P, [np.diag([1, 0, 0]), np.diag([0, 1, 1])])
    assert info.value.index == 1


@settings(max_examples=15)
@given(seeds, st.integers(1, 12), st.integers(1, 2), st.floats(0, 1e-3))
def test_extraction_recovers_action(seed, size, rank, noise):
    rng = np.random.default_rng(seed)
    action = fixtures.random_action(rng, size, rank)
    ex = extract_finite_action(encode_action(action, noise, seed=seed % 1000))
    assert ex.label_action.generators == action.generators


def test_extraction_with_multiplicity():
    action = FiniteAction(3, ((1, 2, 0),))
    ex = extract_finite_action(encode_action(action, 1e-4, seed=2, multiplicity=2))
    assert ex.action.size == 6
    assert ex.label_action.generators == action.generators


def test_threshold():
    assert threshold_value(0.2) == pytest.approx(0.728)
    with pytest.raises(ThresholdExceeded):
        extract_finite_action(encode_action(FiniteAction.cycle(3), 0.2, seed=0))


@pytest.mark.parametrize("n", [4, 8])
def test_berg_bounds(n):
    orbit, r, s = fixtures.berg_fixture(n)
    res = berg_projection(orbit, n, r, s)
    nm = res.norms
    assert nm["u_minus_v"] < 4 / n
    assert nm["p_u"] < 8 / n
    assert nm["p_f"] < 2 / n
    assert nm["p_v"] <= 1e-12
    assert nm["unitary"] < 1e-12


def test_berg_placement_and_hypothesis_checks():
    orbit, r, s = fixtures.berg_fixture(4)
    with pytest.raises(PlacementError):
        berg_projection(orbit, 4, 3, s)
    q = 987
    wide = OrbitRepresentation.from_system(fixtures.golden_rotation(), 0, s - (r - s) - 8,
                                           4 * (r + 1 - s) + 16,
                                           lambda i: np.exp(2j * np.pi * i / q))
    with pytest.raises(HypothesisError):
        berg_projection(wide, 4, r + 1, s)
