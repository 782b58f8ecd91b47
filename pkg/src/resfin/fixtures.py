"""Bundled systems, contexts and random generators used by the acceptance
suite, the ``selftest`` command and the demos."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .core import FiniteAction
from .matrix import OrbitRepresentation
from .paradox import boundary_context, compactified_context, finite_action_context, shift_context
from .rational import rref
from .systems import CompactifiedZ, FiniteSample, PolytopeSystem, ShiftSystem
from .zsystems import EpsGraph, recurrence_scan, shift_sample


def eight_cycle():
    """Rotation by one step on 8 equally spaced circle points."""
    return FiniteSample.circle(8, 1)


def golden_rotation(q=987, p=610):
    return FiniteSample.circle(q, p)


def north_south(q=32):
    return FiniteSample.circle(q, map_fn=lambda a: a - 0.5 * math.sin(a))


def compactified_line():
    """``Z`` with its two ends added as fixed points."""
    return CompactifiedZ([("-inf", "+inf")])


def glued_loop(copies=3):
    """Copies of ``Z`` glued end to end into a loop."""
    labels = [f"y{i}" for i in range(copies)]
    return CompactifiedZ([(labels[i], labels[(i + 1) % copies]) for i in range(copies)])


def full_shift(alphabet=2, rank=1):
    return ShiftSystem(rank, alphabet)


def golden_mean_shift():
    return ShiftSystem(1, 2, ((((), 1), ((1,), 1)),))


def chain_fixtures():
    """``(name, sample, epsilon)`` triples for building models from epsilon-chains."""
    return [
        ("8-cycle rotation", eight_cycle(), Fraction(1, 2)),
        ("golden rotation 55/34", golden_rotation(55, 34), Fraction(1, 4)),
        ("north-south circle map", north_south(32), Fraction(1, 2)),
        ("full 2-shift, period 4", shift_sample(full_shift(), 4), Fraction(1, 2)),
        ("golden mean shift, period 6", shift_sample(golden_mean_shift(), 6), Fraction(1, 4)),
        ("glued loop of 3 lines", glued_loop(3).sample(4), Fraction(1, 2)),
    ]


def small_actions():
    return [
        ("3-cycle", FiniteAction.cycle(3)),
        ("two 2-cycles and a fixed point", FiniteAction(5, ((1, 0, 3, 2, 4),))),
        ("F_2 on 4 points", FiniteAction(4, ((1, 2, 3, 0), (1, 0, 3, 2)))),
    ]


def bundled_contexts():
    """``(name, system, window, radius, context)`` for every bundled action context."""
    out = []
    for window in (1, 2):
        out.append((f"boundary F_2 window {window}", None, window, 2, boundary_context(2, window, 2)))
    for name, action in small_actions():
        out.append((name, action, 1, 1, finite_action_context(action, 1)))
    for name, system in (("compactified Z", compactified_line()), ("glued loop", glued_loop(3))):
        out.append((name, system, 1, 1, compactified_context(system, 1, 1)))
    out.append(("full 2-shift", full_shift(), 1, 1, shift_context(full_shift(), 1, 1)))
    return out


def random_eps_graph(rng, max_nodes=12, epsilon=Fraction(1, 2)):
    n = int(rng.integers(1, max_nodes + 1))
    density = rng.uniform(0.05, 0.4)
    edges = tuple((a, b) for a in range(n) for b in range(n) if rng.random() < density)
    return EpsGraph(tuple(range(n)), edges, epsilon)


def random_action(rng, size, rank=2):
    return FiniteAction(size, tuple(tuple(int(v) for v in rng.permutation(size)) for _ in range(rank)))


def random_simplex_map(rng, dim):
    """A simplex with small integer vertices and the affine map permuting them.

    Returns ``(system, vertices, fixed point)``; the fixed point is the centroid.
    """
    while True:
        verts = [tuple(Fraction(int(v)) for v in rng.integers(-3, 4, size=dim)) for _ in range(dim + 1)]
        diffs = [[v[i] - verts[0][i] for v in verts[1:]] for i in range(dim)]
        _, piv = rref(diffs, dim)
        if len(piv) == dim:
            break
    perm = [int(v) for v in rng.permutation(dim + 1)]
    # solve A v_i + b = v_perm(i): unknowns are the rows of [A | b]
    m = [list(v) + [Fraction(1)] for v in verts]
    a, b = [], []
    for row in range(dim):
        aug = [m[i] + [verts[perm[i]][row]] for i in range(dim + 1)]
        red, _ = rref(aug)
        coeffs = [r[-1] for r in red[:dim + 1]]
        a.append(coeffs[:dim])
        b.append(coeffs[dim])
    system = PolytopeSystem(verts, a, b)
    centroid = tuple(sum(v[i] for v in verts) / (dim + 1) for i in range(dim))
    return system, verts, centroid


def berg_fixture(n, q=987, p=610):
    """Orbit data of the point 0 under the golden rotation with ``f`` the
    first Fourier mode, and recurrence times ``r``, ``-s`` found by scanning
    for ``d(T^r 0, T^s 0) < 1/(7n)`` with ``r, -s >= 2n + 1``."""
    system = golden_rotation(q, p)
    rec = recurrence_scan(system, 0, 1 / (7 * n), 2 * n + 1, 4 * q)
    if rec is None:
        raise RuntimeError("no recurrence within the horizon")
    r, s = rec.n, -rec.m
    lo = s - (r - s)
    orbit = OrbitRepresentation.from_system(system, 0, lo, 4 * (r - s),
                                            lambda i: np.exp(2j * np.pi * i / q))
    return orbit, r, s
