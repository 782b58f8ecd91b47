"""Presentations of compact systems and their point representations.

Every system exposes the same small interface:

``act(g, x)``
    the action of a group word on a point representation;
``distance(x, y)``
    the metric (exact ``Fraction`` except for polytopes);
``check_point(x)``
    raises :class:`InvalidPoint` unless ``x`` represents a point;
``density_defect(points, epsilon)``
    the sup over the resolution grid of the distance to ``points``.

Symbolic metrics are ``2^-m`` where ``m`` is the length of the shortest
group element on which two configurations disagree.
"""
from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import InvalidPoint, MetricError, NonInvertible, ResolutionOverflow
from .rational import as_fraction, common_denominator, solve_feasible
from .words import FiniteQuotient, ball, inverse, is_reduced, letters, reduce_word, to_int

DEFAULT_PATTERN_CAP = 1 << 16


def pattern_cap() -> int:
    return int(os.environ.get("RESFIN_CAP_PATTERNS", DEFAULT_PATTERN_CAP))


def resolution_radius(epsilon) -> int:
    """Least ``R >= 0`` with ``2^-R <= epsilon``."""
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    r = 0
    while Fraction(1, 2 ** r) > eps:
        r += 1
    return r


class System:
    kind = "abstract"
    invertible = True

    def act(self, g, x):
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def check_point(self, x):
        return x

    def density_defect(self, points, epsilon):
        raise NotImplementedError

    def displacement(self, letter, x, y):
        """``d(letter . x, y)``; finite samples override this for off-sample images."""
        return self.distance(self.act((letter,), x), y)


# -- finite samples -----------------------------------------------------------

def _integer_table(rows, den=None):
    rows = [[as_fraction(v) for v in row] for row in rows]
    if den is None:
        den = common_denominator(v for row in rows for v in row)
    nums = [[int(v * den) for v in row] for row in rows]
    big = max((abs(v) for row in nums for v in row), default=0)
    dtype = np.int64 if big < 2 ** 62 else object
    return np.array(nums, dtype=dtype).reshape(len(rows), -1), den


@dataclass(frozen=True, eq=False)
class FiniteSample(System):
    """A finite metric sample ``x_0..x_{n-1}`` with a map per generator.

    Distances are integers over the common denominator ``den``.  For each
    generator either ``images[k]`` is a table of sample indices, or
    ``image_num[k][i, j]`` holds ``d(s_k x_i, x_j) * den`` for an image that
    may lie off the sample.
    """

    num: np.ndarray
    den: int
    images: tuple = ()
    image_num: tuple = ()
    labels: tuple | None = None
    kind = "finite-sample"

    @classmethod
    def from_tables(cls, distances, images=None, image_distances=None,
                    labels=None, check_metric=True):
        rows = [list(r) for r in distances]
        extra = []
        for t in image_distances or []:
            if t is not None:
                extra.extend(list(r) for r in t)
        den = common_denominator(as_fraction(v) for r in rows + extra for v in r)
        num, _ = _integer_table(rows, den)
        n = num.shape[0]
        if num.shape != (n, n):
            raise MetricError("distance table is not square")
        r = max(len(images or []), len(image_distances or []), 1)
        imgs, inums = [], []
        for k in range(r):
            table = images[k] if images and k < len(images) else None
            dist = image_distances[k] if image_distances and k < len(image_distances) else None
            imgs.append(None if table is None else tuple(int(v) for v in table))
            inums.append(None if dist is None else _integer_table(dist, den)[0])
        sample = cls(num, den, tuple(imgs), tuple(inums), labels)
        if check_metric:
            sample.verify_metric()
        for k, table in enumerate(imgs):
            if table is None and inums[k] is None:
                raise MetricError(f"generator {k} has neither image table nor image distances")
            if table is not None and (len(table) != n or any(not 0 <= v < n for v in table)):
                raise MetricError(f"image table of generator {k} leaves the sample")
        return sample

    @property
    def rank(self):
        return len(self.images)

    @property
    def size(self):
        return self.num.shape[0]

    @property
    def invertible(self):
        return all(t is not None and len(set(t)) == len(t) for t in self.images)

    def verify_metric(self):
        d = self.num
        n = d.shape[0]
        if (d != d.T).any():
            i, j = map(int, np.argwhere(d != d.T)[0])
            raise MetricError(f"asymmetric distance at ({i}, {j})", (i, j, j))
        diag = np.diag(d)
        if (diag != 0).any():
            i = int(np.flatnonzero(diag != 0)[0])
            raise MetricError(f"d({i}, {i}) is not zero", (i, i, i))
        off = d + np.eye(n, dtype=d.dtype)
        if (off <= 0).any():
            i, j = map(int, np.argwhere(off <= 0)[0])
            raise MetricError(f"distinct points {i}, {j} at distance zero", (i, j, j))
        for k in range(n):
            bad = d[:, k][:, None] + d[k, :][None, :] < d
            if bad.any():
                i, j = map(int, np.argwhere(bad)[0])
                raise MetricError(f"triangle inequality fails for ({i}, {k}, {j})", (i, k, j))

    def check_point(self, x):
        if not isinstance(x, (int, np.integer)) or not 0 <= x < self.size:
            raise InvalidPoint(f"{x!r} is not a sample index")
        return int(x)

    def distance(self, x, y):
        return Fraction(int(self.num[x, y]), self.den)

    def _table(self, letter):
        k = abs(letter) - 1
        if k >= len(self.images):
            raise InvalidPoint(f"generator {letter} not present")
        t = self.images[k]
        if letter > 0:
            return t
        if t is None or len(set(t)) != len(t):
            raise NonInvertible(f"generator {k} has no inverse on the sample")
        inv = [0] * len(t)
        for i, j in enumerate(t):
            inv[j] = i
        return tuple(inv)

    def act(self, g, x):
        for letter in reversed(g):
            t = self._table(letter)
            if t is None:
                raise InvalidPoint("image leaves the sample")
            x = t[x]
        return x

    def displacement_row(self, letter, i):
        """Numerators of ``d(s x_i, x_j)`` for all ``j``."""
        t = self.images[abs(letter) - 1] if abs(letter) - 1 < len(self.images) else None
        if letter > 0 and t is None:
            return self.image_num[letter - 1][i]
        return self.num[self._table(letter)[i]]

    def displacement(self, letter, x, y):
        return Fraction(int(self.displacement_row(letter, x)[y]), self.den)

    def density_defect(self, points, epsilon=None):
        pts = sorted(set(int(p) for p in points))
        if not pts:
            raise ValueError("density needs at least one point")
        best = self.num[:, pts].min(axis=1).max()
        return Fraction(int(best), self.den)

    @classmethod
    def circle(cls, q, p=None, unit_den=10 ** 6, map_fn=None):
        """``q`` equally spaced circle points with arc-length metric.

        The arc unit is ``floor(2 pi / q * unit_den) / unit_den`` so the table
        is an exact multiple of one rational.  With ``p`` the map is the
        rotation ``i -> i + p``; with ``map_fn`` (angle to angle) the image
        distances are rounded to ``1/unit_den``.
        """
        step = math.floor(2 * math.pi / q * unit_den)
        idx = np.arange(q)
        diff = np.abs(idx[:, None] - idx[None, :])
        circ = np.minimum(diff, q - diff).astype(np.int64) * step
        if map_fn is None:
            images = (tuple((i + (p or 0)) % q for i in range(q)),)
            return cls(circ, unit_den, images, (None,))
        ang = 2 * math.pi * idx / q
        img = np.array([map_fn(a) for a in ang]) % (2 * math.pi)
        gap = np.abs(img[:, None] - ang[None, :])
        gap = np.minimum(gap, 2 * math.pi - gap)
        inum = np.rint(gap * unit_den).astype(np.int64)
        return cls(circ, unit_den, (None,), (inum,))


# -- shifts over Z and F_r ------------------------------------------------------

@dataclass(frozen=True)
class QuotientConfig:
    """The configuration ``x_g = coloring[g . 0]`` pulled back from a finite quotient."""

    quotient: FiniteQuotient
    coloring: tuple

    @classmethod
    def periodic(cls, word):
        """The bi-infinite periodic point of ``Z`` with ``x_k = word[k mod n]``."""
        return cls(FiniteQuotient.cyclic(len(word)), tuple(word))

    def value(self, g):
        return self.coloring[self.quotient.act(g)]


def config_distance(x: QuotientConfig, y: QuotientConfig) -> Fraction:
    """Exact ``2^-m`` distance via breadth-first search on pairs of states."""
    start = (0, 0)
    if x.coloring[0] != y.coloring[0]:
        return Fraction(1)
    seen = {start}
    frontier = [start]
    r = x.quotient.rank
    m = 0
    while frontier:
        m += 1
        nxt = []
        for q1, q2 in frontier:
            for a in letters(r):
                s = (x.quotient.step(a, q1), y.quotient.step(a, q2))
                if s in seen:
                    continue
                if x.coloring[s[0]] != y.coloring[s[1]]:
                    return Fraction(1, 2 ** m)
                seen.add(s)
                nxt.append(s)
        frontier = nxt
    return Fraction(0)


@dataclass(frozen=True)
class ShiftSystem(System):
    """Configurations ``alphabet^{F_r}`` avoiding forbidden patterns.

    A forbidden pattern is a tuple of ``(word, letter)`` pairs; a point contains
    it at ``h`` when ``x_{hw} = letter`` for every pair.  Density is measured
    against locally admissible patterns on balls (patterns avoiding every
    forbidden pattern placed inside the ball), which is exact for full shifts
    and shifts of finite type whose local patterns all extend.
    """

    rank: int
    alphabet: int
    forbidden: tuple = ()
    _placements: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.rank < 1 or self.alphabet < 1:
            raise ValueError("rank and alphabet size must be positive")
        pats = []
        for pat in self.forbidden:
            pat = tuple((reduce_word(tuple(w)), int(c)) for w, c in pat)
            if not pat:
                raise ValueError("empty forbidden pattern")
            pats.append(pat)
        object.__setattr__(self, "forbidden", tuple(pats))

    @property
    def kind(self):
        return "z-shift" if self.rank == 1 else "fr-shift"

    def check_point(self, x):
        if not isinstance(x, QuotientConfig):
            raise InvalidPoint("shift points are quotient configurations")
        if x.quotient.rank != self.rank:
            raise InvalidPoint("quotient rank differs from the shift rank")
        if len(x.coloring) != x.quotient.order:
            raise InvalidPoint("coloring length differs from quotient order")
        if any(not 0 <= c < self.alphabet for c in x.coloring):
            raise InvalidPoint("coloring uses letters outside the alphabet")
        for pat in self.forbidden:
            start = tuple(x.quotient.act(w) for w, _ in pat)
            seen = {start}
            todo = [start]
            while todo:
                t = todo.pop()
                if all(x.coloring[q] == c for q, (_, c) in zip(t, pat)):
                    raise InvalidPoint("configuration contains a forbidden pattern")
                for a in letters(self.rank):
                    u = tuple(x.quotient.step(a, q) for q in t)
                    if u not in seen:
                        seen.add(u)
                        todo.append(u)
        return x

    def act(self, g, x):
        ginv = inverse(reduce_word(tuple(g)))
        q = x.quotient
        coloring = tuple(x.coloring[q.act(ginv, i)] for i in range(q.order))
        return QuotientConfig(q, coloring)

    def distance(self, x, y):
        return config_distance(x, y)

    def pattern(self, x: QuotientConfig, radius: int) -> tuple:
        return tuple(x.value(w) for w in ball(self.rank, radius))

    def placements(self, radius):
        """Index tuples into ``ball(rank, radius)`` for every placement of every forbidden pattern."""
        if radius in self._placements:
            return self._placements[radius]
        words = ball(self.rank, radius)
        index = {w: i for i, w in enumerate(words)}
        out = []
        for pat in self.forbidden:
            reach = max(len(w) for w, _ in pat)
            for h in ball(self.rank, radius + reach):
                pos = [index.get(reduce_word(h + w)) for w, _ in pat]
                if None not in pos:
                    out.append((tuple(pos), tuple(c for _, c in pat)))
        out = sorted(set(out))
        self._placements[radius] = out
        return out

    def admissible(self, pat, radius):
        for pos, vals in self.placements(radius):
            if all(pat[p] == v for p, v in zip(pos, vals)):
                return False
        return True

    def admissible_patterns(self, radius):
        """All locally admissible patterns on the ball, shortlex-indexed."""
        cap = pattern_cap()
        pats = [()]
        for m in range(radius + 1):
            new = len(ball(self.rank, m)) - (len(ball(self.rank, m - 1)) if m else 0)
            nxt = []
            for p in pats:
                for ext in product(range(self.alphabet), repeat=new):
                    q = p + ext
                    if self.admissible(q, m):
                        nxt.append(q)
                        if len(nxt) > cap:
                            raise ResolutionOverflow(
                                f"more than {cap} admissible patterns on the radius-{m} ball")
            pats = nxt
        return pats

    def density_defect(self, points, epsilon):
        """``2^-m`` for the least radius ``m <= R`` at which some admissible
        pattern is missed by every point, else ``2^-(R+1)``."""
        R = resolution_radius(epsilon)
        if self.rank > 1 and (2 * self.rank - 1) ** R > pattern_cap():
            raise ResolutionOverflow(f"radius-{R} ball exceeds the pattern cap")
        seen = {self.pattern(x, R) for x in points}
        pats = [()]
        for m in range(R + 1):
            size = len(ball(self.rank, m))
            new = size - (len(ball(self.rank, m - 1)) if m else 0)
            have = {s[:size] for s in seen}
            nxt = []
            for p in pats:
                for ext in product(range(self.alphabet), repeat=new):
                    q = p + ext
                    if not self.admissible(q, m):
                        continue
                    if q not in have:
                        return Fraction(1, 2 ** m)
                    nxt.append(q)
                    if len(nxt) > pattern_cap():
                        raise ResolutionOverflow("too many admissible patterns")
            pats = nxt
        return Fraction(1, 2 ** (R + 1))


# -- the boundary of F_r ----------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPoint:
    """The infinite reduced word ``prefix + cycle + cycle + ...``."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        p, c = tuple(self.prefix), tuple(self.cycle)
        if not c:
            raise InvalidPoint("boundary points need a nonempty cycle")
        if not is_reduced(p + c + c):
            raise InvalidPoint("boundary word is not reduced")
        while p and p[-1] == c[-1]:
            p, c = p[:-1], (c[-1],) + c[:-1]
        n = len(c)
        for d in range(1, n + 1):
            if n % d == 0 and c == c[:d] * (n // d):
                c = c[:d]
                break
        object.__setattr__(self, "prefix", p)
        object.__setattr__(self, "cycle", c)

    def head(self, n):
        out = self.prefix
        while len(out) < n:
            out += self.cycle
        return out[:n]


class BoundarySystem(System):
    kind = "fr-boundary"

    def __init__(self, rank: int):
        if rank < 1:
            raise ValueError("rank must be positive")
        self.rank = rank

    def __eq__(self, other):
        return isinstance(other, BoundarySystem) and other.rank == self.rank

    def __hash__(self):
        return hash(("boundary", self.rank))

    def check_point(self, x):
        if not isinstance(x, BoundaryPoint):
            raise InvalidPoint("boundary points are eventually periodic words")
        if any(abs(a) > self.rank for a in x.prefix + x.cycle):
            raise InvalidPoint("letter outside the generating set")
        return x

    def act(self, g, x):
        g = reduce_word(tuple(g))
        k = len(g) // len(x.cycle) + 2
        red = reduce_word(g + x.prefix + x.cycle * k)
        return BoundaryPoint(red[: len(red) - len(x.cycle)], x.cycle)

    def distance(self, x, y):
        n = max(len(x.prefix), len(y.prefix)) + math.lcm(len(x.cycle), len(y.cycle))
        a, b = x.head(n), y.head(n)
        for i in range(n):
            if a[i] != b[i]:
                return Fraction(1, 2 ** i)
        return Fraction(0)

    def density_defect(self, points, epsilon):
        R = resolution_radius(epsilon)
        for length in range(1, R + 2):
            have = {x.head(length) for x in points}
            for w in ball(self.rank, length)[len(ball(self.rank, length - 1)):]:
                if w not in have:
                    return Fraction(1, 2 ** (length - 1))
        return Fraction(1, 2 ** (R + 1))

    def point_in(self, w: tuple) -> BoundaryPoint:
        """A canonical point of the cylinder ``C(w)``: continue with ``w``'s last letter."""
        if not w:
            return BoundaryPoint((), (1,))
        return BoundaryPoint(tuple(w), (w[-1],))


# -- compactified copies of Z ---------------------------------------------------------

def _phi(n) -> Fraction:
    return Fraction(n, 1 + abs(n))


class CompactifiedZ(System):
    """Copies of ``Z`` translated by ``T``, each with two endpoint labels.

    Copy ``i`` runs from ``copies[i][0]`` (at ``-inf``) to ``copies[i][1]``
    (at ``+inf``); equal labels are glued into one fixed point.  Points are
    ``(i, n)`` tuples or fixed-point labels.  The metric is the path metric of
    the glued graph in which copy ``i`` is the segment ``[-1, 1]`` placed by
    ``n -> n / (1 + |n|)``.
    """

    kind = "compactified-z"
    rank = 1

    def __init__(self, copies):
        self.copies = tuple((str(a), str(b)) for a, b in copies)
        if not self.copies:
            raise ValueError("need at least one copy of Z")
        self.fixed = tuple(sorted({lab for c in self.copies for lab in c}))
        inf = None
        dist = {a: {b: (Fraction(0) if a == b else inf) for b in self.fixed} for a in self.fixed}
        for a, b in self.copies:
            if a != b and (dist[a][b] is None or dist[a][b] > 2):
                dist[a][b] = dist[b][a] = Fraction(2)
        for k in self.fixed:
            for i in self.fixed:
                for j in self.fixed:
                    if dist[i][k] is not None and dist[k][j] is not None:
                        alt = dist[i][k] + dist[k][j]
                        if dist[i][j] is None or alt < dist[i][j]:
                            dist[i][j] = alt
        self.graph_dist = dist

    def __eq__(self, other):
        return isinstance(other, CompactifiedZ) and other.copies == self.copies

    def __hash__(self):
        return hash(self.copies)

    def check_point(self, x):
        if isinstance(x, str):
            if x not in self.fixed:
                raise InvalidPoint(f"unknown fixed point {x!r}")
            return x
        if (isinstance(x, tuple) and len(x) == 2 and isinstance(x[1], int)
                and 0 <= x[0] < len(self.copies)):
            return x
        raise InvalidPoint(f"{x!r} is not a point")

    def act(self, g, x):
        if isinstance(x, str):
            return x
        return (x[0], x[1] + to_int(g))

    def _ends(self, x):
        if isinstance(x, str):
            return [(x, Fraction(0))]
        lo, hi = self.copies[x[0]]
        p = _phi(x[1])
        return [(lo, p + 1), (hi, 1 - p)]

    def distance(self, x, y):
        if x == y:
            return Fraction(0)
        best = None
        if not isinstance(x, str) and not isinstance(y, str) and x[0] == y[0]:
            best = abs(_phi(x[1]) - _phi(y[1]))
        for e1, d1 in self._ends(x):
            for e2, d2 in self._ends(y):
                g = self.graph_dist[e1][e2]
                if g is not None:
                    cand = d1 + g + d2
                    if best is None or cand < best:
                        best = cand
        if best is None:
            return Fraction(4 * len(self.copies) + 4)
        return best

    def grid(self, epsilon):
        w = math.ceil(2 / as_fraction(epsilon)) + 1
        pts = list(self.fixed)
        for i in range(len(self.copies)):
            pts += [(i, n) for n in range(-w, w + 1)]
        return pts

    def density_defect(self, points, epsilon):
        points = list(points)
        return max(min(self.distance(g, z) for z in points) for g in self.grid(epsilon))

    # atoms of the clopen algebra at window w: singletons |n| < w and one
    # neighbourhood per fixed point containing all attached tails
    def atoms(self, window):
        out = [("nbhd", f) for f in self.fixed]
        for i in range(len(self.copies)):
            out += [("pt", i, n) for n in range(-window + 1, window)]
        return out

    def atom_of(self, x, window):
        if isinstance(x, str):
            return ("nbhd", x)
        i, n = x
        if abs(n) < window:
            return ("pt", i, n)
        return ("nbhd", self.copies[i][1] if n > 0 else self.copies[i][0])

    def translate_atom(self, atom, j, window, target):
        """``T^j(atom)`` at ``window`` as a set of atoms at window ``target``."""
        if target < window + abs(j):
            raise ValueError("target window too small")
        if atom[0] == "pt":
            return frozenset({("pt", atom[1], atom[2] + j)})
        f = atom[1]
        out = {("nbhd", f)}
        for i, (lo, hi) in enumerate(self.copies):
            if hi == f:
                out |= {("pt", i, n) for n in range(window + j, target)}
            if lo == f:
                out |= {("pt", i, n) for n in range(-target + 1, -window + j + 1)}
        return frozenset(out)

    def sample(self, radius):
        """A :class:`FiniteSample` of fixed points and ``|n| <= radius`` with ``T``."""
        pts = list(self.fixed)
        for i in range(len(self.copies)):
            pts += [(i, n) for n in range(-radius, radius + 1)]
        dist = [[self.distance(a, b) for b in pts] for a in pts]
        img = [[self.distance(self.act((1,), a), b) for b in pts] for a in pts]
        return FiniteSample.from_tables(dist, image_distances=[img], labels=tuple(pts),
                                        check_metric=False)


# -- polytopes with affine maps ----------------------------------------------------

def _affine(a, b, x):
    return tuple(sum(a[i][j] * x[j] for j in range(len(x))) + b[i] for i in range(len(b)))


def _inverse_matrix(a):
    n = len(a)
    m = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    from .rational import rref
    red, piv = rref(m, 2 * n)
    if piv[:n] != list(range(n)) or len(red) < n:
        return None
    return [row[n:] for row in red[:n]]


class PolytopeSystem(System):
    """The convex hull ``K`` of rational vertices with ``T(x) = A x + b``."""

    kind = "polytope"
    rank = 1

    def __init__(self, vertices, a, b, grid_den=4):
        self.vertices = [tuple(as_fraction(v) for v in p) for p in vertices]
        self.a = [[as_fraction(v) for v in row] for row in a]
        self.b = [as_fraction(v) for v in b]
        self.dim = len(self.b)
        self.grid_den = grid_den
        # barycentric coordinates when the vertices span a simplex
        k = len(self.vertices)
        self._bary = None
        if k == self.dim + 1:
            lifted = [[v[i] for v in self.vertices] for i in range(self.dim)] + [[Fraction(1)] * k]
            self._bary = _inverse_matrix(lifted)
        self._inside = {}
        inv = _inverse_matrix(self.a)
        self.a_inv = inv
        if inv is not None:
            self.b_inv = [-sum(inv[i][j] * self.b[j] for j in range(self.dim)) for i in range(self.dim)]
        for v in self.vertices:
            if len(v) != self.dim:
                raise ValueError("vertex dimension mismatch")
            if not self.contains(_affine(self.a, self.b, v)):
                raise InvalidPoint("the affine map sends a vertex outside the hull")

    @property
    def invertible(self):
        return self.a_inv is not None

    def contains(self, x):
        x = tuple(x)
        if x in self._inside:
            return self._inside[x]
        if self._bary is not None:
            coords = _affine(self._bary, [0] * (self.dim + 1), x + (Fraction(1),))
            ok = all(c >= 0 for c in coords)
        else:
            ok = self._contains_lp(x)
        if len(self._inside) < 1 << 16:
            self._inside[x] = ok
        return ok

    def _contains_lp(self, x):
        k = len(self.vertices)
        rows = [[v[i] for v in self.vertices] for i in range(self.dim)] + [[1] * k]
        rhs = list(x) + [1]
        return solve_feasible(rows, rhs, k) is not None

    def check_point(self, x):
        x = tuple(as_fraction(v) for v in x)
        if len(x) != self.dim or not self.contains(x):
            raise InvalidPoint(f"{x} is not in the polytope")
        return x

    def map(self, x):
        return _affine(self.a, self.b, x)

    def act(self, g, x):
        for letter in reversed(g):
            if letter > 0:
                x = _affine(self.a, self.b, x)
            else:
                if self.a_inv is None:
                    raise NonInvertible("affine map is singular")
                x = _affine(self.a_inv, self.b_inv, x)
        return tuple(x)

    def distance(self, x, y):
        return math.sqrt(sum(float(p - q) ** 2 for p, q in zip(x, y)))

    def grid(self):
        k = len(self.vertices)
        g = self.grid_den
        pts = set(self.vertices)
        for comp in product(range(g + 1), repeat=k):
            if sum(comp) == g:
                pts.add(tuple(sum(Fraction(c, g) * v[i] for c, v in zip(comp, self.vertices))
                              for i in range(self.dim)))
        return sorted(pts)

    def density_defect(self, points, epsilon=None):
        pts = np.array([[float(c) for c in p] for p in points])
        grid = np.array([[float(c) for c in p] for p in self.grid()])
        gaps = np.sqrt(((grid[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        return float(gaps.min(axis=1).max())


# -- algebraic Z-actions ------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicPoint:
    """A periodic point of ``(Q/Z)^Z``: ``x_k = values[k mod n]``."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(as_fraction(v) % 1 for v in self.values))


def _circle(a: Fraction) -> Fraction:
    a = a % 1
    return min(a, 1 - a)


class AlgebraicSystem(System):
    """``X_f``: points of ``(R/Z)^Z`` annihilated by ``f`` (shift action).

    ``f`` is a dict ``{exponent: coefficient}`` acting as the convolution
    ``(x f)_k = sum_j c_j x_{k+j}``.  Points are periodic rational points.
    The metric is ``max_k 2^-|k| |x_k - y_k|_circle``.
    """

    kind = "algebraic-z"
    rank = 1

    def __init__(self, f, grid_period=6):
        self.f = {int(k): int(v) for k, v in dict(f).items() if int(v) != 0}
        self.grid_period = grid_period
        self._grid = None

    def check_point(self, x):
        if not isinstance(x, PeriodicPoint):
            raise InvalidPoint("algebraic points are periodic rational sequences")
        n = len(x.values)
        for k in range(n):
            if sum(c * x.values[(k + j) % n] for j, c in self.f.items()) % 1 != 0:
                raise InvalidPoint("point is not annihilated by f")
        return x

    def act(self, g, x):
        j = to_int(g)
        n = len(x.values)
        return PeriodicPoint(tuple(x.values[(k - j) % n] for k in range(n)))

    def distance(self, x, y):
        n = math.lcm(len(x.values), len(y.values))
        best = Fraction(0)
        for k in range(-n, n + 1):
            if Fraction(1, 2 ** abs(k)) <= best:
                continue
            d = _circle(x.values[k % len(x.values)] - y.values[k % len(y.values)])
            best = max(best, d / 2 ** abs(k))
        return best

    def grid(self):
        if self._grid is None:
            from .symbolic import periodic_solutions
            self._grid = periodic_solutions(self.f, self.grid_period)
        return self._grid

    def distance_table(self, left, right):
        """Exact distances as ``(numerators, denominator)`` with integer arrays."""
        pts = list(left) + list(right)
        period = math.lcm(*[len(p.values) for p in pts])
        den = common_denominator(v for p in pts for v in p.values)
        scale = den * 2 ** period
        dtype = np.int64 if scale < 2 ** 60 else object
        ks = np.arange(-period, period + 1)
        weight = np.array([2 ** (period - abs(int(k))) for k in ks], dtype=dtype)

        def table(group):
            return np.array([[int(p.values[int(k) % len(p.values)] * den) for k in ks]
                             for p in group], dtype=dtype)

        a, b = table(left), table(right)
        out = np.empty((len(a), len(b)), dtype=dtype)
        for i in range(len(a)):
            diff = (a[i][None, :] - b) % den
            circ = np.minimum(diff, den - diff)
            out[i] = (circ * weight[None, :]).max(axis=1)
        return out, scale

    def density_defect(self, points, epsilon=None):
        num, scale = self.distance_table(self.grid(), list(points))
        return Fraction(int(num.min(axis=1).max()), scale)
