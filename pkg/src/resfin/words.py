"""Reduced words in free groups, balls, boundary cylinders, finite quotients.

A group element of ``F_r`` is a reduced tuple of nonzero ints: ``k`` is the
k-th generator (1-based) and ``-k`` its inverse.  ``Z`` is ``F_1``, so the
integer ``n`` is the word ``(1,) * n`` or ``(-1,) * -n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from .errors import ResfinError

Word = tuple

LETTER_NAMES = "abcdefgh"


def letter_key(x: int):
    return (abs(x), x < 0)


def word_key(w: Word):
    """Shortlex order: length first, then a < a^-1 < b < b^-1 < ..."""
    return (len(w), tuple(letter_key(x) for x in w))


def reduce_word(w) -> Word:
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(w) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1)) and 0 not in w


def inverse(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def multiply(*words) -> Word:
    out = ()
    for w in words:
        out = reduce_word(out + tuple(w))
    return out


def from_int(n: int) -> Word:
    return (1,) * n if n >= 0 else (-1,) * (-n)


def to_int(w: Word) -> int:
    return sum(1 if x > 0 else -1 for x in w)


def letters(r: int):
    out = []
    for k in range(1, r + 1):
        out += [k, -k]
    return out


@lru_cache(maxsize=None)
def sphere(r: int, n: int) -> tuple:
    """Reduced words of length exactly ``n``, shortlex sorted."""
    if n == 0:
        return ((),)
    out = []
    for w in sphere(r, n - 1):
        for x in letters(r):
            if not w or w[-1] != -x:
                out.append(w + (x,))
    return tuple(sorted(out, key=word_key))


@lru_cache(maxsize=None)
def ball(r: int, n: int) -> tuple:
    """Reduced words of length at most ``n`` in shortlex order.

    The prefix ``ball(r, m)`` of ``ball(r, n)`` is exactly the radius-m ball,
    which lets patterns be restricted by slicing.
    """
    out = []
    for k in range(n + 1):
        out.extend(sphere(r, k))
    return tuple(out)


def ball_size(r: int, n: int) -> int:
    if r == 1:
        return 2 * n + 1
    return 1 + 2 * r * ((2 * r - 1) ** n - 1) // (2 * r - 2)


def word_str(w: Word) -> str:
    if not w:
        return "e"
    return "".join(LETTER_NAMES[abs(x) - 1] + ("'" if x < 0 else "") for x in w)


def parse_word(text: str) -> Word:
    """Inverse of :func:`word_str` (``"ab'"`` -> ``(1, -2)``)."""
    text = text.strip()
    if text in ("", "e", "1"):
        return ()
    out = []
    i = 0
    while i < len(text):
        k = LETTER_NAMES.index(text[i]) + 1
        if i + 1 < len(text) and text[i + 1] == "'":
            out.append(-k)
            i += 2
        else:
            out.append(k)
            i += 1
    return reduce_word(out)


# -- boundary cylinders ------------------------------------------------------

def cylinders_of_length(r: int, n: int) -> tuple:
    return sphere(r, n)


def refine_cylinder(r: int, w: Word, n: int) -> frozenset:
    """The length-``n`` cylinders (n >= |w|) whose union is ``C(w)``."""
    if n < len(w):
        raise ValueError("cannot refine to a shorter length")
    out = [w]
    for _ in range(n - len(w)):
        nxt = []
        for u in out:
            for x in letters(r):
                if not u or u[-1] != -x:
                    nxt.append(u + (x,))
        out = nxt
    return frozenset(out)


def boundary_translate(r: int, g: Word, w: Word) -> frozenset:
    """The image ``g . C(w)`` on the boundary of ``F_r`` as a set of cylinders.

    ``w = ()`` denotes the whole boundary.  The result is a finite disjoint
    union of cylinders, each of length at most ``|g| + |w|``.
    """
    g = reduce_word(g)
    if not w:
        return frozenset({()})
    c = 0
    while c < min(len(g), len(w)) and g[len(g) - 1 - c] == -w[c]:
        c += 1
    if c < len(w):
        return frozenset({g[: len(g) - c] + w[c:]})
    h = g[: len(g) - c]
    banned = -w[-1]
    out = set()
    for t in letters(r):
        if t != banned:
            out |= boundary_translate(r, h, (t,))
    return frozenset(out)


def normalize_cylinders(r: int, cyls) -> frozenset:
    """Canonical form: refine every cylinder to the maximal length present."""
    cyls = list(cyls)
    if not cyls:
        return frozenset()
    n = max(len(w) for w in cyls)
    out = set()
    for w in cyls:
        out |= refine_cylinder(r, w, n)
    return frozenset(out)


def translate_set(r: int, g: Word, cyls) -> frozenset:
    out = set()
    for w in cyls:
        out |= boundary_translate(r, g, w)
    return normalize_cylinders(r, out)


def same_clopen(r: int, a, b) -> bool:
    a, b = list(a), list(b)
    n = max([len(w) for w in a + b] or [0])
    ra = set().union(*[refine_cylinder(r, w, n) for w in a]) if a else set()
    rb = set().union(*[refine_cylinder(r, w, n) for w in b]) if b else set()
    return ra == rb


# -- finite quotients --------------------------------------------------------

@dataclass(frozen=True)
class FiniteQuotient:
    """A transitive permutation action of ``F_r`` on ``{0, ..., order-1}``.

    ``perms[k][q]`` is the image of ``q`` under generator ``k+1``.  The base
    point is 0, so a word ``g`` is sent to ``g . 0``.
    """

    perms: tuple
    inverses: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        perms = tuple(tuple(int(x) for x in p) for p in self.perms)
        if not perms:
            raise ResfinError("quotient needs at least one generator")
        n = len(perms[0])
        invs = []
        for k, p in enumerate(perms):
            if len(p) != n or sorted(p) != list(range(n)):
                from .errors import NonBijective
                raise NonBijective(k)
            inv = [0] * n
            for i, j in enumerate(p):
                inv[j] = i
            invs.append(tuple(inv))
        object.__setattr__(self, "perms", perms)
        object.__setattr__(self, "inverses", tuple(invs))
        seen = {0}
        todo = [0]
        while todo:
            q = todo.pop()
            for p in perms + tuple(invs):
                if p[q] not in seen:
                    seen.add(p[q])
                    todo.append(p[q])
        if len(seen) != n:
            raise ResfinError("quotient action is not transitive")

    @property
    def order(self) -> int:
        return len(self.perms[0])

    @property
    def rank(self) -> int:
        return len(self.perms)

    def step(self, letter: int, q: int) -> int:
        if letter > 0:
            return self.perms[letter - 1][q]
        return self.inverses[-letter - 1][q]

    def act(self, w: Word, q: int = 0) -> int:
        for x in reversed(w):
            q = self.step(x, q)
        return q

    @classmethod
    def cyclic(cls, n: int) -> "FiniteQuotient":
        return cls((tuple((i + 1) % n for i in range(n)),))

    @classmethod
    def trivial(cls, r: int) -> "FiniteQuotient":
        return cls(tuple((0,) for _ in range(r)))

    @classmethod
    def product_of_cyclic(cls, orders) -> "FiniteQuotient":
        """``Z/n_1 x ... x Z/n_r`` with generator k acting on coordinate k."""
        orders = list(orders)
        elems = list(product(*[range(n) for n in orders]))
        index = {e: i for i, e in enumerate(elems)}
        perms = []
        for k, n in enumerate(orders):
            p = []
            for e in elems:
                f = list(e)
                f[k] = (f[k] + 1) % n
                p.append(index[tuple(f)])
            perms.append(tuple(p))
        return cls(tuple(perms))

    @classmethod
    def ball_quotient(cls, r: int, radius: int) -> "FiniteQuotient":
        """A permutation action in which the ball of ``radius`` acts freely
        on the base point: distinct words of length <= radius send 0 to
        distinct points.  Tree edges are fixed, the rest is completed in
        shortlex order."""
        words = ball(r, radius)
        index = {w: i for i, w in enumerate(words)}
        n = len(words)
        maps = [dict() for _ in range(r)]
        for w, i in index.items():
            for k in range(1, r + 1):
                up = (k,) + w
                if reduce_word(up) == up and up in index:
                    maps[k - 1][i] = index[up]
                elif w and w[0] == -k:
                    maps[k - 1][i] = index[w[1:]]
        perms = []
        for m in maps:
            free_src = [i for i in range(n) if i not in m]
            used = set(m.values())
            free_dst = [j for j in range(n) if j not in used]
            for i, j in zip(free_src, free_dst):
                m[i] = j
            perms.append(tuple(m[i] for i in range(n)))
        return cls(tuple(perms))
