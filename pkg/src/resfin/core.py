"""Finite actions, witnesses of residual finiteness, and their defect measurements."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidPoint, Mismatch, NonBijective, NonEvaluable, NonInvertible
from .rational import as_fraction
from .systems import (BoundarySystem, FiniteSample, PolytopeSystem, QuotientConfig,
                      ShiftSystem, System, resolution_radius)
from .words import ball

__all__ = [
    "FiniteAction",
    "Witness",
    "DiscreteMeasure",
    "TestFunction",
    "validate_action_description",
    "check_witness",
    "merge_local_witnesses",
    "empirical_measure",
    "ucp_defects",
    "default_test_family",
    "cylinder_indicators",
    "coordinate_functions",
    "SampleDistance",
    "equivariance_defect",
]


@dataclass(frozen=True)
class FiniteAction:
    """``F_r`` acting on ``{0..size-1}``; ``generators[k]`` is the permutation of letter ``k+1``."""

    size: int
    generators: tuple
    inverses: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(tuple(int(v) for v in g) for g in self.generators)
        invs = []
        for k, g in enumerate(gens):
            if len(g) != self.size or sorted(g) != list(range(self.size)):
                raise NonBijective(k)
            inv = [0] * self.size
            for i, j in enumerate(g):
                inv[j] = i
            invs.append(tuple(inv))
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "inverses", tuple(invs))

    @property
    def rank(self):
        return len(self.generators)

    def step(self, letter: int, z: int) -> int:
        if letter > 0:
            return self.generators[letter - 1][z]
        return self.inverses[-letter - 1][z]

    def act(self, word, z: int) -> int:
        for letter in reversed(tuple(word)):
            z = self.step(letter, z)
        return z

    def group_order(self) -> int:
        """Order of the permutation group generated by the tables (closure)."""
        ident = tuple(range(self.size))
        seen = {ident}
        todo = [ident]
        while todo:
            p = todo.pop()
            for g in self.generators:
                q = tuple(g[i] for i in p)
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        return len(seen)

    def disjoint_union(self, other: "FiniteAction") -> "FiniteAction":
        if other.rank != self.rank:
            raise Mismatch("actions of different rank")
        n = self.size
        gens = [g + tuple(v + n for v in h) for g, h in zip(self.generators, other.generators)]
        return FiniteAction(n + other.size, tuple(gens))

    @classmethod
    def cycle(cls, n: int) -> "FiniteAction":
        return cls(n, (tuple((i + 1) % n for i in range(n)),))


def validate_action_description(size: int, generator_tables) -> FiniteAction:
    if size < 1:
        raise ValueError("an action needs at least one point")
    tables = list(generator_tables)
    if not tables:
        raise ValueError("one table per generator is required")
    return FiniteAction(size, tuple(tables))


@dataclass(frozen=True, eq=False)
class Witness:
    """A finite model ``(E, action, zeta)`` with its measured defects."""

    system: System
    action: FiniteAction
    zeta: tuple
    scope: tuple
    epsilon: Fraction
    density_defect: object
    equivariance_defect: object

    @property
    def passed(self) -> bool:
        return self.density_defect < self.epsilon and self.equivariance_defect < self.epsilon


def _default_scope(system, action, scope):
    if scope is None:
        return tuple(range(1, action.rank + 1))
    scope = tuple(sorted(set(int(s) for s in scope), key=lambda s: (abs(s), s < 0)))
    if any(s == 0 or abs(s) > action.rank for s in scope):
        raise Mismatch("scope letter outside the generating set")
    return scope


def equivariance_defect(system, action, zeta, scope):
    """``max_{z, s} d(zeta(s z), s zeta(z))``."""
    best = Fraction(0)
    if isinstance(system, FiniteSample):
        for s in scope:
            for z in range(action.size):
                row = system.displacement_row(s, zeta[z])
                v = Fraction(int(row[zeta[action.step(s, z)]]), system.den)
                if v > best:
                    best = v
        return best
    for s in scope:
        for z in range(action.size):
            v = system.displacement(s, zeta[z], zeta[action.step(s, z)])
            if v > best:
                best = v
    return best


def check_witness(system: System, action: FiniteAction, zeta, scope=None, epsilon=Fraction(1, 2)) -> Witness:
    """Measure both defects of the candidate model and package them.

    The density defect is the supremum over the system's resolution grid of
    the distance to ``zeta(E)``; the equivariance defect is the maximum over
    ``z`` in ``E`` and ``s`` in the scope of ``d(zeta(s z), s zeta(z))``.
    """
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    zeta = tuple(zeta)
    if len(zeta) != action.size:
        raise InvalidPoint("zeta must assign a point to every element of E")
    if action.rank != system.rank:
        raise Mismatch(f"action rank {action.rank} differs from system rank {system.rank}")
    zeta = tuple(system.check_point(x) for x in zeta)
    scope = _default_scope(system, action, scope)
    dens = system.density_defect(zeta, eps)
    equi = equivariance_defect(system, action, zeta, scope)
    return Witness(system, action, zeta, scope, eps, dens, equi)


def merge_local_witnesses(witnesses) -> Witness:
    """Disjoint union of models over one system; density is recomputed."""
    witnesses = list(witnesses)
    if not witnesses:
        raise ValueError("nothing to merge")
    first = witnesses[0]
    for w in witnesses[1:]:
        if not (w.system is first.system or w.system == first.system):
            raise Mismatch("witnesses live on different systems")
        if w.scope != first.scope:
            raise Mismatch("witnesses have different generator scopes")
        if w.epsilon != first.epsilon:
            raise Mismatch("witnesses use different epsilons")
    action = first.action
    zeta = first.zeta
    for w in witnesses[1:]:
        action = action.disjoint_union(w.action)
        zeta = zeta + w.zeta
    dens = first.system.density_defect(zeta, first.epsilon)
    equi = max(w.equivariance_defect for w in witnesses)
    return Witness(first.system, action, zeta, first.scope, first.epsilon, dens, equi)


@dataclass(frozen=True)
class DiscreteMeasure:
    support: tuple
    weights: tuple

    def __post_init__(self):
        if sum(self.weights) != 1:
            raise ValueError("weights must sum to 1")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries must be distinct")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")

    def integrate(self, fn):
        return sum(w * fn(x) for x, w in zip(self.support, self.weights))


# -- test functions ----------------------------------------------------------------

class TestFunction:
    """A bounded function with a known sup norm and Lipschitz constant."""

    __test__ = False

    def __init__(self, fn, sup_norm, lipschitz, name=""):
        self.fn = fn
        self.sup_norm = sup_norm
        self.lipschitz = lipschitz
        self.name = name

    def __call__(self, x):
        return self.fn(x)

    def at_image(self, system, letter, x):
        """``f(letter . x)``."""
        return self.fn(system.act((letter,), x))

    def times(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(lambda x: self.fn(x) * other.fn(x), self.sup_norm * other.sup_norm,
                            self.sup_norm * other.lipschitz + other.sup_norm * self.lipschitz,
                            f"{self.name}*{other.name}")


class SampleDistance(TestFunction):
    """``x -> d(x, x_j)`` on a finite sample, evaluable at off-sample images."""

    def __init__(self, sample: FiniteSample, j: int):
        self.sample = sample
        self.j = j
        diam = Fraction(int(sample.num.max()), sample.den)
        super().__init__(lambda i: sample.distance(i, j), diam, 1, f"d(., x{j})")

    def at_image(self, system, letter, x):
        return self.sample.displacement(letter, x, self.j)


def cylinder_indicators(system, radius):
    """Indicators of the admissible patterns on ``ball(radius)`` (shifts) or of
    the length-``radius+1`` cylinders (boundaries).  Lipschitz constant ``2^radius``."""
    lip = 2 ** radius
    out = []
    if isinstance(system, ShiftSystem):
        for pat in system.admissible_patterns(radius):
            out.append(TestFunction(lambda x, p=pat: int(system.pattern(x, radius) == p), 1, lip,
                                    f"[{''.join(map(str, pat))}]"))
    elif isinstance(system, BoundarySystem):
        n = radius + 1
        for w in ball(system.rank, n)[len(ball(system.rank, n - 1)):]:
            out.append(TestFunction(lambda x, w=w: int(x.head(n) == w), 1, lip, f"C{w}"))
    else:
        raise NonEvaluable("cylinder indicators need a symbolic system")
    return out


def coordinate_functions(system: PolytopeSystem):
    bound = max(max(abs(v) for v in p) for p in system.vertices)
    return [TestFunction(lambda x, i=i: x[i], bound, 1, f"x{i}") for i in range(system.dim)]


def default_test_family(system, epsilon):
    if isinstance(system, (ShiftSystem, BoundarySystem)):
        return cylinder_indicators(system, resolution_radius(epsilon))
    if isinstance(system, PolytopeSystem):
        return coordinate_functions(system)
    if isinstance(system, FiniteSample):
        return [SampleDistance(system, j) for j in range(system.size)]
    from .systems import AlgebraicSystem, CompactifiedZ, _circle
    if isinstance(system, CompactifiedZ):
        centres = list(system.fixed) + [(i, 0) for i in range(len(system.copies))]
        diam = max(system.distance(a, b) for a in centres for b in centres) + 2
        return [TestFunction(lambda x, c=c: system.distance(x, c), diam, 1, f"d(., {c})")
                for c in centres]
    if isinstance(system, AlgebraicSystem):
        return [TestFunction(lambda x: _circle(x.values[0]), Fraction(1, 2), 1, "|x_0|")]
    raise NonEvaluable(f"no default test family for {system.kind}")


def empirical_measure(witness: Witness, functions=None):
    """The pullback of the uniform measure on ``E`` and its invariance defect.

    The defect is ``max_{s, f} |mu(f o s) - mu(f)|`` over generators in scope
    and the test family.  Returns ``(measure, defect, lipschitz_bound)`` where
    the bound is the largest Lipschitz constant of the family.
    """
    system = witness.system
    funcs = default_test_family(system, witness.epsilon) if functions is None else list(functions)
    n = witness.action.size
    counts = {}
    for x in witness.zeta:
        counts[x] = counts.get(x, 0) + 1
    support = tuple(counts)
    measure = DiscreteMeasure(support, tuple(Fraction(counts[x], n) for x in support))
    defect = Fraction(0)
    for s in witness.scope:
        for f in funcs:
            moved = sum(f.at_image(system, s, x) for x in witness.zeta)
            base = sum(f(x) for x in witness.zeta)
            d = abs(moved - base) / n
            if d > defect:
                defect = d
    lip = max((f.lipschitz for f in funcs), default=0)
    return measure, defect, lip


def ucp_defects(witness: Witness, functions, scope=None):
    """Defects of the evaluation map ``phi(f)(z) = f(zeta(z))``.

    Returns ``(mult_defect, norm_defect, equivariance_defect)`` measured in
    the sup norm on ``E``.  Equivariance compares ``f(s^-1 zeta(z))`` with
    ``f(zeta(s^-1 z))``.
    """
    system = witness.system
    funcs = list(functions)
    scope = witness.scope if scope is None else tuple(scope)
    zeta = witness.zeta
    act = witness.action

    def evaluate(f, x):
        try:
            return f(x)
        except (InvalidPoint, KeyError, IndexError, TypeError) as exc:
            raise NonEvaluable(f"{f.name} at {x!r}: {exc}") from exc

    values = [[evaluate(f, x) for x in zeta] for f in funcs]
    mult = 0
    for a, f in enumerate(funcs):
        for b, g in enumerate(funcs):
            fg = f.times(g)
            for z, x in enumerate(zeta):
                d = abs(evaluate(fg, x) - values[a][z] * values[b][z])
                mult = max(mult, d)
    norm = 0
    for a, f in enumerate(funcs):
        norm = max(norm, f.sup_norm - max((abs(v) for v in values[a]), default=0))
    equi = 0
    for s in scope:
        for a, f in enumerate(funcs):
            for z, x in enumerate(zeta):
                try:
                    moved = f(system.act((-s,), x))
                except NonInvertible as exc:
                    raise NonEvaluable(f"inverse of generator {s} unavailable") from exc
                other = values[a][act.step(-s, z)]
                equi = max(equi, abs(moved - other))
    return mult, norm, equi
