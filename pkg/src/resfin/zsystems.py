"""Chain recurrence, compressible clopen sets and orbit recurrence for Z-systems."""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import networkx as nx
import numpy as np

from .core import FiniteAction, Witness, check_witness
from .errors import NoChain, NonInvertible, ResolutionOverflow
from .rational import as_fraction
from .systems import (CompactifiedZ, FiniteSample, QuotientConfig, ShiftSystem,
                      config_distance)
from .words import to_int

__all__ = [
    "EpsGraph",
    "ClopenSet",
    "build_eps_graph",
    "chain_recurrent_set",
    "brute_force_recurrent",
    "model_from_chains",
    "find_compressible_clopen",
    "recurrence_scan",
    "shift_sample",
    "atom_cap",
]

DEFAULT_ATOM_CAP = 4096
# unions of atoms are enumerated exhaustively, so the search itself is capped harder
SEARCH_ATOM_LIMIT = 22


def atom_cap() -> int:
    return int(os.environ.get("RESFIN_CAP_ATOMS", DEFAULT_ATOM_CAP))


@dataclass(frozen=True)
class EpsGraph:
    nodes: tuple
    edges: tuple
    epsilon: Fraction

    def successors(self, x):
        return [b for a, b in self.edges if a == x]

    def to_networkx(self):
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g


def build_eps_graph(sample: FiniteSample, epsilon, letter: int = 1) -> EpsGraph:
    """Edges ``(x, y)`` exactly when ``d(T x, y) < epsilon``."""
    eps = as_fraction(epsilon)
    bound = eps * sample.den
    edges = []
    for x in range(sample.size):
        row = sample.displacement_row(letter, x)
        for y in np.flatnonzero(np.array([v < bound for v in row], dtype=bool)):
            edges.append((x, int(y)))
    return EpsGraph(tuple(range(sample.size)), tuple(edges), eps)


def chain_recurrent_set(graph: EpsGraph) -> frozenset:
    """Nodes on a directed cycle: their strongly connected component carries an edge."""
    g = graph.to_networkx()
    out = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            out |= comp
        else:
            (v,) = comp
            if g.has_edge(v, v):
                out.add(v)
    return frozenset(out)


def brute_force_recurrent(graph: EpsGraph) -> frozenset:
    """Independent check: ``x`` is recurrent iff some path of length ``1..n`` returns to it."""
    succ = {v: set() for v in graph.nodes}
    for a, b in graph.edges:
        succ[a].add(b)
    n = len(graph.nodes)
    out = set()
    for x in graph.nodes:
        layer = set(succ[x])
        for _ in range(n):
            if x in layer:
                out.add(x)
                break
            layer = set().union(*[succ[v] for v in layer]) if layer else set()
    return frozenset(out)


def _shortest_cycle(succ, x):
    """Breadth-first shortest cycle through ``x``, ties broken by smallest node index."""
    parent = {}
    queue = deque()
    for y in sorted(succ[x]):
        if y == x:
            return [x]
        if y not in parent:
            parent[y] = x
            queue.append(y)
    while queue:
        v = queue.popleft()
        for y in sorted(succ[v]):
            if y == x:
                path = [v]
                while path[-1] != x:
                    path.append(parent[path[-1]])
                return path[::-1]
            if y not in parent:
                parent[y] = v
                queue.append(y)
    return None


def model_from_chains(sample: FiniteSample, epsilon, letter: int = 1) -> Witness:
    """A finite model built from shortest epsilon-cycles through an epsilon-dense
    subset of the chain recurrent nodes; ``zeta`` is the inclusion."""
    graph = build_eps_graph(sample, epsilon, letter)
    rec = sorted(chain_recurrent_set(graph))
    if not rec:
        raise NoChain("no node lies on an epsilon-cycle")
    eps = graph.epsilon
    succ = {v: set() for v in graph.nodes}
    for a, b in graph.edges:
        succ[a].add(b)
    zeta = []
    perm = []
    # a recurrent node already within epsilon of the model needs no cycle of its own
    for c in rec:
        if any(sample.distance(c, z) < eps for z in zeta):
            continue
        cyc = _shortest_cycle(succ, c)
        base = len(zeta)
        zeta.extend(cyc)
        perm.extend(base + (i + 1) % len(cyc) for i in range(len(cyc)))
    action = FiniteAction(len(zeta), (tuple(perm),))
    return check_witness(sample, action, zeta, scope=(letter,), epsilon=eps)


# -- compressible clopen sets ----------------------------------------------------

@dataclass(frozen=True)
class ClopenSet:
    """A union of atoms at a fixed window."""

    window: int
    atoms: tuple

    def describe(self):
        return [str(a) for a in self.atoms]


def _admissible_words(shift: ShiftSystem, n: int):
    """Words ``x_0..x_{n-1}`` avoiding every forbidden pattern placed inside."""
    pats = []
    for pat in shift.forbidden:
        pats.append([(to_int(w), c) for w, c in pat])
    out = []
    for w in product(range(shift.alphabet), repeat=n):
        ok = True
        for pat in pats:
            lo = min(p for p, _ in pat)
            hi = max(p for p, _ in pat)
            for h in range(-lo, n - hi):
                if all(w[h + p] == c for p, c in pat):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(w)
    return out


def _atom_masks(system, window):
    """Atoms at ``window`` with bitmasks of their refinement and of their ``T``-image
    over a common finer atom list."""
    if isinstance(system, FiniteSample):
        table = system.images[0]
        if table is None:
            raise ValueError("compressibility needs an exact map on the sample")
        atoms = list(range(system.size))
        return atoms, [1 << a for a in atoms], [1 << table[a] for a in atoms]
    if isinstance(system, ShiftSystem):
        if system.rank != 1:
            raise ValueError("compressibility search is for Z-shifts")
        atoms = _admissible_words(system, window)
        if len(atoms) > atom_cap():
            raise ResolutionOverflow(f"{len(atoms)} atoms at window {window} exceed the cap")
        fine = {w: i for i, w in enumerate(_admissible_words(system, window + 1))}
        ref, img = [], []
        for w in atoms:
            r = t = 0
            for a in range(system.alphabet):
                if w + (a,) in fine:
                    r |= 1 << fine[w + (a,)]
                if (a,) + w in fine:
                    t |= 1 << fine[(a,) + w]
            ref.append(r)
            img.append(t)
        return atoms, ref, img
    if isinstance(system, CompactifiedZ):
        raw = system.atoms(window)
        atoms = sorted((a for a in raw if a[0] == "pt"), key=lambda a: (a[1], a[2]))
        atoms += [a for a in raw if a[0] == "nbhd"]
        if len(atoms) > atom_cap():
            raise ResolutionOverflow(f"{len(atoms)} atoms at window {window} exceed the cap")
        fine = {a: i for i, a in enumerate(system.atoms(window + 1))}
        ref, img = [], []
        for a in atoms:
            r = system.translate_atom(a, 0, window, window + 1)
            t = system.translate_atom(a, 1, window, window + 1)
            ref.append(sum(1 << fine[b] for b in r))
            img.append(sum(1 << fine[b] for b in t))
        return atoms, ref, img
    raise ValueError(f"no clopen atoms for {system.kind}")


def find_compressible_clopen(system, window: int):
    """The lexicographically least union of atoms ``U`` with ``T(U)`` a proper subset of ``U``.

    Candidate unions are index tuples into the atom list (points before
    neighbourhoods of fixed points) enumerated in lexicographic order.
    Returns a :class:`ClopenSet` or ``None``.
    """
    atoms, ref, img = _atom_masks(system, window)
    k = len(atoms)
    if k > min(atom_cap(), SEARCH_ATOM_LIMIT):
        raise ResolutionOverflow(f"{k} atoms exceed the search limit {min(atom_cap(), SEARCH_ATOM_LIMIT)}")

    def search(start, chosen, rmask, tmask):
        for i in range(start, k):
            r = rmask | ref[i]
            t = tmask | img[i]
            if t & ~r == 0 and t != r:
                return chosen + (i,)
            found = search(i + 1, chosen + (i,), r, t)
            if found is not None:
                return found
        return None

    hit = search(0, (), 0, 0)
    if hit is None:
        return None
    return ClopenSet(window, tuple(atoms[i] for i in hit))


# -- orbit recurrence ---------------------------------------------------------------

@dataclass(frozen=True)
class Recurrence:
    n: int
    m: int
    distance: object


def recurrence_scan(system, x, epsilon, N: int, horizon: int):
    """Least ``(n, m)`` in the order ``(n + m, n)`` with ``N <= n, m <= horizon``
    and ``d(T^n x, T^-m x) < epsilon``; ``None`` when the horizon is exhausted."""
    if N > horizon:
        raise ValueError("N must not exceed the horizon")
    if not getattr(system, "invertible", True):
        raise NonInvertible("the inverse map is unavailable")
    eps = as_fraction(epsilon) if not isinstance(epsilon, float) else epsilon
    x = system.check_point(x)
    fwd = [x]
    bwd = [x]
    for _ in range(horizon):
        fwd.append(system.act((1,), fwd[-1]))
        bwd.append(system.act((-1,), bwd[-1]))
    for total in range(2 * N, 2 * horizon + 1):
        for n in range(max(N, total - horizon), min(horizon, total - N) + 1):
            m = total - n
            d = system.distance(fwd[n], bwd[m])
            if d < eps:
                return Recurrence(n, m, d)
    return None


def shift_sample(shift: ShiftSystem, period: int) -> FiniteSample:
    """All admissible periodic points of exact period dividing ``period`` as a
    finite sample with the exact shift map."""
    words = [w for w in product(range(shift.alphabet), repeat=period)]
    pts = []
    for w in words:
        x = QuotientConfig.periodic(w)
        try:
            shift.check_point(x)
        except Exception:
            continue
        pts.append(x)
    index = {p.coloring: i for i, p in enumerate(pts)}
    images = [index[shift.act((1,), p).coloring] for p in pts]
    dist = [[config_distance(a, b) for b in pts] for a in pts]
    return FiniteSample.from_tables(dist, images=[images], labels=tuple(p.coloring for p in pts))
