"""Finite models from invariant measures, affine lifts to measure spaces, and
fixed-point models on polytopes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .core import FiniteAction, TestFunction, Witness, check_witness, coordinate_functions
from .errors import NoPositiveRationalSolution, NotFixed, OrbitLeavesPolytope, SizeOverflow
from .rational import as_fraction, common_denominator, nullspace
from .systems import PolytopeSystem, QuotientConfig, ShiftSystem
from .words import FiniteQuotient, ball, reduce_word, to_int, word_key

__all__ = [
    "product_measure",
    "MeasureModel",
    "measure_to_model",
    "LiftedModel",
    "affine_lift",
    "omega_defect",
    "affine_function",
    "FixedPointModel",
    "fixed_point_model",
    "barycentre",
    "is_invariant_measure",
]


def product_measure(probs):
    """The Bernoulli measure: a pattern ``{word: letter}`` has mass ``prod probs[letter]``."""
    probs = list(probs)

    def mass(pattern):
        out = 1
        for c in pattern.values():
            out = out * probs[c]
        return out
    return mass


@dataclass(frozen=True, eq=False)
class MeasureModel:
    witness: Witness
    support: tuple  # words carrying the join atoms
    atoms: tuple  # patterns on ``support``
    weights: dict  # atom -> Fraction x_Q
    blocks: dict  # atom -> tuple of E indices
    scale: int  # M
    radius: Fraction  # max |x_Q - mu(Q)|
    base_radius: int
    scope: tuple

    def cell(self, atom, s=None):
        """Index of the partition atom containing ``atom`` (or ``s^-1 atom``)."""
        base = ball(self.witness.system.rank, self.base_radius)
        pos = {w: i for i, w in enumerate(self.support)}
        if s is None:
            return tuple(atom[pos[g]] for g in base)
        return tuple(atom[pos[reduce_word(s + g)]] for g in base)


def _round(value, q):
    return Fraction(math.floor(value * q + Fraction(1, 2)), q)


def measure_to_model(system: ShiftSystem, radius: int, mu, epsilon, scope=None,
                     denominator_bound: int = 10 ** 6, tolerance=None) -> MeasureModel:
    """A finite model whose empirical measure approximates the shift-invariant ``mu``.

    The partition ``P`` is by patterns on ``ball(radius)``; its join with the
    translates ``sP`` (``s`` in scope) is the partition by patterns on the
    union of the translated balls.  The balance equations
    ``sum_{Q in P_j} x_Q = sum_{Q in sP_j} x_Q`` are solved over the
    rationals near ``mu`` with every ``x_Q > 0``.
    """
    if not isinstance(system, ShiftSystem):
        raise ValueError("measure_to_model works on shift systems")
    r = system.rank
    scope = tuple(range(1, r + 1)) if scope is None else tuple(scope)
    base = ball(r, radius)
    support = set(base)
    for s in scope:
        support |= {reduce_word((s,) + g) for g in base}
    support = tuple(sorted(support, key=word_key))
    pos = {w: i for i, w in enumerate(support)}
    atoms, masses = [], []
    for pat in product(range(system.alphabet), repeat=len(support)):
        m = mu(dict(zip(support, pat)))
        if m > 0:
            atoms.append(pat)
            masses.append(m)
    if not atoms:
        raise NoPositiveRationalSolution("mu vanishes on every atom")
    masses = [as_fraction(m) for m in masses]
    n = len(atoms)
    cells = sorted({tuple(a[pos[g]] for g in base) for a in atoms})
    rows = []
    for s in scope:
        for c in cells:
            row = [0] * n
            for i, a in enumerate(atoms):
                if tuple(a[pos[g]] for g in base) == c:
                    row[i] += 1
                if tuple(a[pos[reduce_word((s,) + g)]] for g in base) == c:
                    row[i] -= 1
            if any(row):
                rows.append(row)
    basis, free = nullspace(rows, n) if rows else ([[Fraction(int(i == j)) for i in range(n)] for j in range(n)], list(range(n)))
    tol = min(masses) / 2 if tolerance is None else as_fraction(tolerance)
    found = None
    for q in range(1, denominator_bound + 1):
        coords = [_round(masses[f], q) for f in free]
        x = [sum(c * b[i] for c, b in zip(coords, basis)) for i in range(n)]
        if any(v <= 0 for v in x):
            continue
        total = sum(x)
        x = [v / total for v in x]
        dev = max(abs(v - m) for v, m in zip(x, masses))
        if dev <= tol:
            found = (x, dev)
            break
    if found is None:
        raise NoPositiveRationalSolution(
            f"no positive rational solution within {tol} using denominators <= {denominator_bound}")
    x, dev = found
    scale = common_denominator(x)
    sizes = [int(v * scale) for v in x]
    blocks, start = {}, 0
    for a, c in zip(atoms, sizes):
        blocks[a] = tuple(range(start, start + c))
        start += c
    total = start
    gens = []
    for s in range(1, r + 1):
        perm = list(range(total))
        if s in scope:
            for c in cells:
                left = [e for a in atoms if tuple(a[pos[g]] for g in base) == c for e in blocks[a]]
                right = [e for a in atoms
                         if tuple(a[pos[reduce_word((s,) + g)]] for g in base) == c for e in blocks[a]]
                for i, j in zip(left, right):
                    perm[i] = j
        gens.append(tuple(perm))
    action = FiniteAction(total, tuple(gens))
    zeta = []
    if r == 1:
        # the support is an interval of Z: repeat the pattern periodically
        ints = [to_int(w) for w in support]
        length = len(ints)
        quotient = FiniteQuotient.cyclic(length)
        for a in atoms:
            coloring = [0] * length
            for k, c in zip(ints, a):
                coloring[k % length] = c
            zeta.extend([QuotientConfig(quotient, tuple(coloring))] * len(blocks[a]))
    else:
        quotient = FiniteQuotient.ball_quotient(r, radius + 1)
        for a in atoms:
            coloring = [0] * quotient.order
            for w, c in zip(support, a):
                coloring[quotient.act(w)] = c
            zeta.extend([QuotientConfig(quotient, tuple(coloring))] * len(blocks[a]))
    witness = check_witness(system, action, zeta, scope=scope, epsilon=epsilon)
    return MeasureModel(witness, support, tuple(atoms), dict(zip(atoms, x)), blocks, scale,
                        dev, radius, scope)


# -- lifts to spaces of measures ------------------------------------------------------

def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _displacements(witness: Witness, functions):
    """``f(zeta(s y)) - f(s zeta(y))`` per element, generator and function."""
    system = witness.system
    cols = []
    for s in witness.scope:
        for f in functions:
            col = []
            for y, x in enumerate(witness.zeta):
                col.append(f(witness.zeta[witness.action.step(s, y)]) - f.at_image(system, s, x))
            cols.append(col)
    return cols


def omega_defect(witness: Witness, functions) -> object:
    """``max_{s, y, f} |f(zeta(s y)) - f(s zeta(y))|``."""
    cols = _displacements(witness, functions)
    return max((abs(v) for col in cols for v in col), default=0)


@dataclass(frozen=True, eq=False)
class LiftedModel:
    base: Witness
    m: int
    compositions: tuple
    action: FiniteAction
    defect: object
    base_defect: object

    def measure(self, i):
        """``zeta`` of the ``i``-th composition as ``{point: weight}``."""
        out = {}
        for y, c in enumerate(self.compositions[i]):
            if c:
                x = self.base.zeta[y]
                out[x] = out.get(x, 0) + Fraction(c, self.m)
        return out


def affine_lift(witness: Witness, m: int, functions=None, size_cap: int = 200_000) -> LiftedModel:
    """All ``m``-quantized convex combinations of the base model, acted on by
    pushing weights forward; the lift's ``d_Omega`` equivariance defect is measured."""
    from .core import default_test_family
    funcs = default_test_family(witness.system, witness.epsilon) if functions is None else list(functions)
    n = witness.action.size
    count = math.comb(n + m - 1, m)
    if count > size_cap:
        raise SizeOverflow(f"{count} quantized measures exceed the cap {size_cap}")
    comps = list(_compositions(m, n))
    index = {c: i for i, c in enumerate(comps)}
    gens = []
    for s in range(1, witness.action.rank + 1):
        perm = []
        for c in comps:
            out = [0] * n
            for y, v in enumerate(c):
                out[witness.action.step(s, y)] += v
            perm.append(index[tuple(out)])
        gens.append(tuple(perm))
    action = FiniteAction(len(comps), tuple(gens))
    cols = _displacements(witness, funcs)
    base = max((abs(v) for col in cols for v in col), default=0)
    if not cols:
        return LiftedModel(witness, m, tuple(comps), action, 0, base)
    mat = np.array(comps, dtype=np.int64)
    if all(isinstance(v, (int, Fraction)) for col in cols for v in col):
        den = common_denominator(v for col in cols for v in col)
        d = np.array([[int(v * den) for v in col] for col in cols], dtype=object).T
        vals = mat.astype(object) @ d
        lift = Fraction(int(np.abs(vals).max()), den * m)
    else:
        d = np.array(cols, dtype=float).T
        lift = float(np.abs(mat @ d).max()) / m
    return LiftedModel(witness, m, tuple(comps), action, lift, base)


# -- polytopes ---------------------------------------------------------------------

def affine_function(system: PolytopeSystem, coeffs, const=0, name="") -> TestFunction:
    coeffs = [as_fraction(c) for c in coeffs]
    const = as_fraction(const)

    def fn(x):
        return sum(c * v for c, v in zip(coeffs, x)) + const
    norm = max(abs(fn(v)) for v in system.vertices)
    return TestFunction(fn, norm, sum(abs(c) for c in coeffs), name or "affine")


@dataclass(frozen=True, eq=False)
class FixedPointModel:
    witness: Witness
    defect: object  # d_Omega equivariance defect
    bound: object  # (2/m) max ||f||
    elements: tuple  # (v index, k)


def fixed_point_model(system: PolytopeSystem, V, w, m: int, functions=None, epsilon=Fraction(1, 2)):
    """The model ``V x {-m..m}`` with the cyclic successor and
    ``zeta(v, k) = (1 - |k|/m) T^k v + (|k|/m) w`` for a fixed point ``w``."""
    w = tuple(as_fraction(c) for c in w)
    if system.map(w) != w:
        raise NotFixed("T(w) differs from w")
    system.check_point(w)
    V = [system.check_point(v) for v in V]
    funcs = coordinate_functions(system) if functions is None else list(functions)
    elements = [(i, k) for i in range(len(V)) for k in range(-m, m + 1)]
    index = {e: j for j, e in enumerate(elements)}
    if not system.invertible:
        raise OrbitLeavesPolytope("negative powers need an invertible map")
    inside = {}
    zeta = []
    for i, v in enumerate(V):
        orbit = {0: v}
        for k in range(1, m + 1):
            orbit[k] = system.act((1,), orbit[k - 1])
            orbit[-k] = system.act((-1,), orbit[-k + 1])
        for k in range(-m, m + 1):
            p = orbit[k]
            if abs(k) != m:
                if p not in inside:
                    inside[p] = system.contains(p)
                if not inside[p]:
                    raise OrbitLeavesPolytope(f"T^{k} of vertex {i} leaves the polytope")
            t = Fraction(abs(k), m)
            zeta.append(tuple((1 - t) * a + t * b for a, b in zip(p, w)))
    perm = tuple(index[(i, k + 1 if k < m else -m)] for i, k in elements)
    action = FiniteAction(len(elements), (perm,))
    witness = check_witness(system, action, zeta, scope=(1,), epsilon=epsilon)
    defect = omega_defect(witness, funcs)
    bound = Fraction(2, m) * max(f.sup_norm for f in funcs)
    assert defect <= bound, (defect, bound)
    return FixedPointModel(witness, defect, bound, tuple(elements))


def is_invariant_measure(points_weights, system: PolytopeSystem) -> bool:
    mass = {}
    for x, wt in points_weights:
        mass[tuple(x)] = mass.get(tuple(x), 0) + wt
    pushed = {}
    for x, wt in mass.items():
        y = system.map(x)
        pushed[y] = pushed.get(y, 0) + wt
    return pushed == mass


def barycentre(points_weights, system: PolytopeSystem | None = None):
    """``sum w_i x_i``; if the measure is invariant under the system's affine map
    the result is checked to be a fixed point."""
    pw = [(tuple(as_fraction(c) for c in x), as_fraction(wt)) for x, wt in points_weights]
    if sum(wt for _, wt in pw) != 1:
        raise ValueError("weights must sum to 1")
    dim = len(pw[0][0])
    b = tuple(sum(wt * x[i] for x, wt in pw) for i in range(dim))
    if system is not None and is_invariant_measure(pw, system):
        assert system.map(b) == b
    return b
