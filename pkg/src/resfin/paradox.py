"""Bounded-resolution paradoxicality, invariant measures and equidecomposition.

An :class:`ActionContext` fixes two atom levels: *source* atoms (the pieces
a decomposition may use) and finer *target* atoms on which every translate
of a source atom is an exact union.  All decisions are exact at that level.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import networkx as nx

from .core import FiniteAction
from .errors import ContextOverflow, StaleContext
from .rational import linprog_exact
from .systems import CompactifiedZ, ShiftSystem
from .words import (ball, boundary_translate, from_int, refine_cylinder, sphere,
                    word_str)
from .zsystems import atom_cap

__all__ = [
    "ActionContext",
    "ParadoxCertificate",
    "InvariantMeasureCertificate",
    "boundary_context",
    "finite_action_context",
    "compactified_context",
    "shift_context",
    "invariant_measure_lp",
    "decide_paradoxical",
    "verify_certificate",
    "equidecompose",
    "DEFAULT_NODE_BUDGET",
]

DEFAULT_NODE_BUDGET = 200_000


def _key(atom):
    return json.dumps(atom, sort_keys=True, default=str)


@dataclass(frozen=True, eq=False)
class ActionContext:
    """Atoms, translators and exact atom-level images at a fixed resolution."""

    kind: str
    source: tuple
    target: tuple
    refine: dict
    translators: tuple
    images: dict
    description: str = ""
    digest: str = field(init=False)

    def __post_init__(self):
        if len(self.target) > atom_cap():
            raise ContextOverflow(f"{len(self.target)} atoms exceed the cap {atom_cap()}")
        tset = set(self.target)
        for a in self.source:
            if not self.refine[a] <= tset:
                raise ContextOverflow("refinement leaves the target atoms")
        for s in self.translators:
            for a in self.source:
                if not self.images[s][a] <= tset:
                    raise ContextOverflow(f"image of {a} under {s} is not a union of target atoms")
        payload = {
            "kind": self.kind,
            "source": [_key(a) for a in self.source],
            "target": [_key(t) for t in self.target],
            "refine": {_key(a): sorted(_key(t) for t in self.refine[a]) for a in self.source},
            "translators": [list(s) for s in self.translators],
            "images": {word_str(s): {_key(a): sorted(_key(t) for t in self.images[s][a])
                                     for a in self.source} for s in self.translators},
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        object.__setattr__(self, "digest", hashlib.sha256(blob).hexdigest())
        object.__setattr__(self, "_tindex", {t: i for i, t in enumerate(self.target)})

    def tindex(self, t):
        return self._tindex[t]

    def union(self, atoms) -> frozenset:
        """Target atoms of a union of source atoms."""
        out = set()
        for a in atoms:
            out |= self.refine[a]
        return frozenset(out)

    def as_source(self, targets):
        """The source atoms whose union is exactly ``targets``, or None."""
        targets = frozenset(targets)
        chosen = [a for a in self.source if self.refine[a] <= targets]
        if self.union(chosen) != targets:
            return None
        return chosen

    def bound(self) -> str:
        return self.description or f"{len(self.source)} source atoms, {len(self.translators)} translators"


# -- builders -----------------------------------------------------------------------

def boundary_context(rank: int, window: int, radius: int) -> ActionContext:
    """Cylinders of length ``window`` on the boundary of ``F_rank``, translators
    ``ball(rank, radius)``, target cylinders of length ``window + radius``."""
    source = sphere(rank, window)
    target = sphere(rank, window + radius)
    refine = {a: refine_cylinder(rank, a, window + radius) for a in source}
    translators = ball(rank, radius)
    images = {}
    for s in translators:
        images[s] = {}
        for a in source:
            out = set()
            for c in boundary_translate(rank, s, a):
                out |= refine_cylinder(rank, c, window + radius)
            images[s][a] = frozenset(out)
    return ActionContext("fr-boundary", tuple(source), tuple(target), refine, tuple(translators),
                         images, f"boundary of F_{rank}: cylinders of length {window}, "
                                 f"translators of length <= {radius}")


def finite_action_context(action: FiniteAction, radius: int = 1) -> ActionContext:
    pts = tuple(range(action.size))
    refine = {z: frozenset({z}) for z in pts}
    translators = ball(action.rank, radius)
    images = {s: {z: frozenset({action.act(s, z)}) for z in pts} for s in translators}
    return ActionContext("finite", pts, pts, refine, tuple(translators), images,
                         f"finite action on {action.size} points, translators of length <= {radius}")


def compactified_context(system: CompactifiedZ, window: int, radius: int) -> ActionContext:
    source = tuple(system.atoms(window))
    target = tuple(system.atoms(window + radius))
    refine = {a: system.translate_atom(a, 0, window, window + radius) for a in source}
    translators = tuple(from_int(j) for j in sorted(range(-radius, radius + 1), key=lambda j: (abs(j), j < 0)))
    images = {s: {a: system.translate_atom(a, len(s) * (1 if not s or s[0] > 0 else -1),
                                           window, window + radius)
                  for a in source} for s in translators}
    return ActionContext("compactified-z", source, target, refine, translators, images,
                         f"compactified Z: window {window}, translators T^j with |j| <= {radius}")


def shift_context(shift: ShiftSystem, window: int, radius: int) -> ActionContext:
    """Full Z-shift: words on positions ``[0, window)``; targets on ``[-radius, window + radius)``."""
    if shift.rank != 1 or shift.forbidden:
        raise ValueError("shift contexts are built for full Z-shifts")
    from itertools import product
    k = shift.alphabet
    source = tuple(product(range(k), repeat=window))
    target = tuple(product(range(k), repeat=window + 2 * radius))
    translators = tuple(from_int(j) for j in sorted(range(-radius, radius + 1), key=lambda j: (abs(j), j < 0)))

    def placed(w, offset):
        # target words carrying w at positions offset..offset+window-1
        lo = offset + radius
        return frozenset(t for t in target if t[lo:lo + window] == w)

    refine = {a: placed(a, 0) for a in source}
    images = {s: {a: placed(a, len(s) * (1 if not s or s[0] > 0 else -1)) for a in source}
              for s in translators}
    return ActionContext("z-shift", source, target, refine, translators, images,
                         f"full {k}-shift: words of length {window}, shifts |j| <= {radius}")


# -- invariant measures ------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantMeasureCertificate:
    digest: str
    weights: dict  # target atom -> Fraction
    normalized: tuple  # source atoms of A

    def mass(self, ctx, atoms):
        return sum((self.weights.get(t, Fraction(0)) for t in ctx.union(atoms)), Fraction(0))


def _measure_rows(ctx: ActionContext):
    n = len(ctx.target)
    rows = set()
    for s in ctx.translators:
        for a in ctx.source:
            row = [0] * n
            for t in ctx.images[s][a]:
                row[ctx.tindex(t)] += 1
            for t in ctx.refine[a]:
                row[ctx.tindex(t)] -= 1
            if any(row):
                rows.add(tuple(row))
    return sorted(rows)


def _is_invariant(ctx, weights):
    for s in ctx.translators:
        for a in ctx.source:
            if sum(weights[t] for t in ctx.images[s][a]) != sum(weights[t] for t in ctx.refine[a]):
                return False
    return True


def invariant_measure_lp(ctx: ActionContext, A) -> InvariantMeasureCertificate | None:
    """Exact weights on target atoms, invariant under every translator on every
    source atom, with ``mu(A) = 1``; None when infeasible at this context."""
    A = tuple(A)
    if not A:
        raise ValueError("A must be nonempty")
    a_targets = ctx.union(A)
    uniform = {t: Fraction(1, len(a_targets)) for t in ctx.target}
    if _is_invariant(ctx, uniform):
        return InvariantMeasureCertificate(ctx.digest, uniform, A)
    n = len(ctx.target)
    rows = [list(r) for r in _measure_rows(ctx)]
    rhs = [0] * len(rows)
    rows.append([1 if t in a_targets else 0 for t in ctx.target])
    rhs.append(1)
    status, x, _ = linprog_exact(None, rows, rhs, n)
    if status != "optimal":
        return None
    weights = {t: x[i] for i, t in enumerate(ctx.target)}
    return InvariantMeasureCertificate(ctx.digest, weights, A)


# -- paradoxical decompositions ------------------------------------------------------------

@dataclass(frozen=True)
class ParadoxCertificate:
    """Pieces ``(translator, target atoms)`` with ``sum 1_{A_i} >= k 1_A`` and
    ``sum 1_{s_i A_i} <= l 1_A``."""

    digest: str
    target_set: frozenset  # target atoms of A
    pieces: tuple
    k: int
    l: int


def decide_paradoxical(ctx: ActionContext, A, k: int, l: int,
                       node_budget: int = DEFAULT_NODE_BUDGET,
                       measure_prune: bool = True) -> ParadoxCertificate | None:
    """A certificate of ``(k, l)``-paradoxicality of ``A`` with pieces that are
    unions of source atoms, or None if there is none at this context.

    If an invariant measure normalizing ``A`` exists the answer is None
    (``k mu(A) <= l mu(A)`` would follow).  Otherwise a depth-first search
    assigns ``k`` translators to each source atom of ``A`` subject to the
    target multiplicity bound ``l``.  ``measure_prune=False`` skips the
    measure check and runs the search alone.
    """
    if not k > l > 0:
        raise ValueError("need k > l > 0")
    A = tuple(a for a in ctx.source if a in set(A))
    if not A:
        raise ValueError("A must be a nonempty union of source atoms")
    if measure_prune and invariant_measure_lp(ctx, A) is not None:
        return None
    inside = ctx.union(A)
    choices = []
    for a in A:
        ok = [s for s in ctx.translators if ctx.images[s][a] <= inside]
        choices.append(list(combinations_with_replacement(ok, k)))
    load = {t: 0 for t in inside}
    picked = []
    nodes = 0

    def place(a, combo, sign):
        for s in combo:
            for t in ctx.images[s][a]:
                load[t] += sign

    def fits(a, combo):
        extra = {}
        for s in combo:
            for t in ctx.images[s][a]:
                extra[t] = extra.get(t, 0) + 1
                if load[t] + extra[t] > l:
                    return False
        return True

    def search(i):
        nonlocal nodes
        if i == len(A):
            return True
        for combo in choices[i]:
            nodes += 1
            if nodes > node_budget:
                raise ContextOverflow(f"search budget of {node_budget} nodes exhausted")
            if not fits(A[i], combo):
                continue
            place(A[i], combo, 1)
            picked.append(combo)
            if search(i + 1):
                return True
            picked.pop()
            place(A[i], combo, -1)
        return False

    if not search(0):
        return None
    groups = {}
    for a, combo in zip(A, picked):
        counts = {}
        for s in combo:
            counts[s] = counts.get(s, 0) + 1
        for s, c in counts.items():
            for j in range(c):
                groups.setdefault((s, j), set()).add(a)
    pieces = tuple((s, ctx.union(atoms)) for (s, j), atoms in sorted(groups.items(),
                   key=lambda kv: (len(kv[0][0]), kv[0][0], kv[0][1])))
    return ParadoxCertificate(ctx.digest, inside, pieces, k, l)


def verify_certificate(cert: ParadoxCertificate, ctx: ActionContext) -> bool:
    """Recount both multiplicity inequalities on target atoms."""
    if cert.digest != ctx.digest:
        raise StaleContext("certificate was issued for a different context")
    if ctx.as_source(cert.target_set) is None:
        raise StaleContext("A is not a union of source atoms")
    cover = {t: 0 for t in ctx.target}
    image = {t: 0 for t in ctx.target}
    for s, piece in cert.pieces:
        if s not in ctx.images:
            raise StaleContext(f"translator {word_str(s)} is not in the context")
        atoms = ctx.as_source(piece)
        if atoms is None:
            raise StaleContext("a piece is not a union of source atoms")
        for a in atoms:
            for t in ctx.refine[a]:
                cover[t] += 1
            for t in ctx.images[s][a]:
                image[t] += 1
    for t in ctx.target:
        if t in cert.target_set:
            if cover[t] < cert.k or image[t] > cert.l:
                return False
        elif image[t] > 0:
            return False
    return True


# -- type-semigroup equivalence ------------------------------------------------------------

def equidecompose(ctx: ActionContext, P, Q, node_budget: int = DEFAULT_NODE_BUDGET):
    """Realize ``P ~ Q`` for labeled unions ``{label: source atoms}``.

    Returns a list of pieces ``(translator, n, m, target atoms)`` with the
    pieces ``C x {n}`` partitioning ``P`` and ``sC x {m}`` partitioning ``Q``,
    or None when no matching exists at atom granularity.
    """
    P = {n: tuple(a for a in ctx.source if a in set(v)) for n, v in dict(P).items()}
    Q = {m: tuple(a for a in ctx.source if a in set(v)) for m, v in dict(Q).items()}
    mu = invariant_measure_lp(ctx, ctx.source)
    if mu is not None:
        pm = sum(mu.mass(ctx, v) for v in P.values())
        qm = sum(mu.mass(ctx, v) for v in Q.values())
        if pm != qm:
            return None
    left = [(a, n) for n in sorted(P) for a in P[n]]
    items = {(t, m) for m in Q for t in ctx.union(Q[m])}
    options = []
    for a, n in left:
        opts = []
        for s in ctx.translators:
            img = ctx.images[s][a]
            for m in sorted(Q):
                cells = frozenset((t, m) for t in img)
                if cells <= items:
                    opts.append((s, m, cells))
        options.append(opts)

    single = all(len(c) == 1 for opts in options for _, _, c in opts)
    chosen = None
    if single:
        if len(left) != len(items):
            return None
        g = nx.Graph()
        lnodes = [("L", i) for i in range(len(left))]
        g.add_nodes_from(lnodes, bipartite=0)
        g.add_nodes_from((("R",) + c for c in sorted(items, key=_key)), bipartite=1)
        best = {}
        for i, opts in enumerate(options):
            for s, m, cells in opts:
                (cell,) = cells
                node = ("R",) + cell
                if not g.has_edge(("L", i), node):
                    g.add_edge(("L", i), node)
                    best[(i, cell)] = (s, m, cells)
        match = nx.bipartite.hopcroft_karp_matching(g, top_nodes=lnodes)
        if sum(1 for v in lnodes if v in match) != len(left):
            return None
        chosen = [best[(i, match[("L", i)][1:])] for i in range(len(left))]
    else:
        covered = set()
        stack = []
        nodes = 0
        total = len(items)

        def search(i, count):
            nonlocal nodes
            if i == len(left):
                return count == total
            for s, m, cells in options[i]:
                nodes += 1
                if nodes > node_budget:
                    raise ContextOverflow(f"search budget of {node_budget} nodes exhausted")
                if cells & covered:
                    continue
                covered.update(cells)
                stack.append((s, m, cells))
                if search(i + 1, count + len(cells)):
                    return True
                stack.pop()
                covered.difference_update(cells)
            return False

        if not search(0, 0):
            return None
        chosen = stack
    groups = {}
    for (a, n), (s, m, _) in zip(left, chosen):
        groups.setdefault((s, n, m), []).append(a)
    return [(s, n, m, ctx.union(atoms)) for (s, n, m), atoms in
            sorted(groups.items(), key=lambda kv: (len(kv[0][0]), kv[0][0], str(kv[0][1]), str(kv[0][2])))]
