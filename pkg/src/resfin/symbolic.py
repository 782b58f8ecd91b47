"""Bernoulli models from finite quotients and algebraic Z-actions via Smith normal form."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import FiniteAction, Witness, check_witness
from .errors import Inconclusive, Infinite, NotInvertible, SizeOverflow
from .systems import AlgebraicSystem, PeriodicPoint, QuotientConfig, ShiftSystem
from .words import FiniteQuotient, boundary_translate

__all__ = [
    "GroupRingElement",
    "boundary_translate",
    "bernoulli_model",
    "smith_normal_form",
    "circulant",
    "bareiss_det",
    "algebraic_fixed_points",
    "periodic_solutions",
    "algebraic_model_witness",
    "fourier_min",
]

DEFAULT_SIZE_CAP = 1 << 16


@dataclass(frozen=True)
class GroupRingElement:
    """A finitely supported integer combination ``sum c_j t^j`` in ``Z[Z]``."""

    terms: tuple

    def __post_init__(self):
        acc = {}
        for e, c in self.terms:
            acc[int(e)] = acc.get(int(e), 0) + int(c)
        object.__setattr__(self, "terms", tuple(sorted((e, c) for e, c in acc.items() if c)))

    @classmethod
    def of(cls, f) -> "GroupRingElement":
        if isinstance(f, GroupRingElement):
            return f
        if isinstance(f, dict):
            return cls(tuple(f.items()))
        if isinstance(f, int):
            return cls(((0, f),))
        return cls(tuple(tuple(p) for p in f))

    def as_dict(self):
        return dict(self.terms)

    def __mul__(self, other):
        other = GroupRingElement.of(other)
        out = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                out.append((e1 + e2, c1 * c2))
        return GroupRingElement(tuple(out))


# -- Bernoulli shifts ---------------------------------------------------------------

def bernoulli_model(alphabet_size: int, quotient: FiniteQuotient, epsilon,
                    size_cap: int = DEFAULT_SIZE_CAP) -> Witness:
    """All colorings of the quotient, translated through it, as a model of the full shift."""
    k, n = alphabet_size, quotient.order
    if k ** n > size_cap:
        raise SizeOverflow(f"{k}^{n} configurations exceed the cap {size_cap}")
    configs = list(product(range(k), repeat=n))

    def index(c):
        out = 0
        for v in c:
            out = out * k + v
        return out

    gens = []
    for g in range(1, quotient.rank + 1):
        back = quotient.inverses[g - 1]
        gens.append(tuple(index(tuple(c[back[q]] for q in range(n))) for c in configs))
    action = FiniteAction(len(configs), tuple(gens))
    system = ShiftSystem(quotient.rank, k)
    zeta = [QuotientConfig(quotient, c) for c in configs]
    return check_witness(system, action, zeta, epsilon=epsilon)


# -- integer linear algebra ---------------------------------------------------------------

def bareiss_det(m) -> int:
    """Exact integer determinant (fraction-free elimination)."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_normal_form(m):
    """Return ``(U, D, V)`` with ``U m V = D`` diagonal, ``d_1 | d_2 | ...``, ``d_i >= 0``.

    ``U`` and ``V`` are unimodular integer matrices (lists of lists).
    """
    a = [list(map(int, row)) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row dst -= q * row src
        a[dst] = [x - q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):  # col dst -= q * col src
        for row in a:
            row[dst] -= q * row[src]
        for row in v:
            row[dst] -= q * row[src]

    for t in range(min(rows, cols)):
        while True:
            nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            p = a[t][t]
            clean = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(t, i, a[i][t] // p)
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(t, j, a[t][j] // p)
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % p), None)
            if bad is None:
                break
            a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
            u[t] = [x + y for x, y in zip(u[t], u[bad[0]])]
        if t < rows and t < cols and a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return u, a, v


def circulant(f, n: int):
    """``M[i][(i + j) mod n] += c_j``: the matrix of ``x -> x f`` on ``n``-periodic points."""
    f = GroupRingElement.of(f)
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for e, c in f.terms:
            m[i][(i + e) % n] += c
    return m


def algebraic_fixed_points(f, n: int):
    """``(order, invariant_factors)`` of ``Z^n / M Z^n`` for the circulant of ``f``.

    The factors listed are those greater than 1, in divisibility order.
    """
    m = circulant(f, n)
    det = bareiss_det(m)
    if det == 0:
        raise Infinite(f"the circulant of f at n={n} is singular")
    _, d, _ = smith_normal_form(m)
    factors = tuple(d[i][i] for i in range(n) if d[i][i] > 1)
    order = math.prod(factors)
    assert order == abs(det)
    return order, factors


def periodic_solutions(f, n: int, size_cap: int = DEFAULT_SIZE_CAP):
    """The ``n``-periodic points of ``X_f`` as :class:`PeriodicPoint`\\ s.

    With ``U M V = D`` the solutions of ``M x = 0 mod 1`` are ``x = V y mod 1``
    for ``y_i`` in ``(1/d_i) Z``.
    """
    m = circulant(f, n)
    _, d, v = smith_normal_form(m)
    diag = [d[i][i] for i in range(n)]
    if 0 in diag:
        raise Infinite("infinitely many periodic points")
    if math.prod(diag) > size_cap:
        raise SizeOverflow(f"{math.prod(diag)} periodic points exceed the cap {size_cap}")
    out = []
    for ks in product(*[range(di) for di in diag]):
        y = [Fraction(k, di) for k, di in zip(ks, diag)]
        x = tuple(sum(v[i][j] * y[j] for j in range(n)) % 1 for i in range(n))
        out.append(PeriodicPoint(x))
    return sorted(out, key=lambda p: p.values)


def fourier_min(f, grid: int = 1 << 10) -> float:
    f = GroupRingElement.of(f)
    best = math.inf
    for k in range(grid):
        th = 2 * math.pi * k / grid
        val = abs(sum(c * cmath.exp(1j * e * th) for e, c in f.terms))
        best = min(best, val)
    return best


def algebraic_model_witness(f, n: int, epsilon, grid_period: int = 6,
                            margin: float = 1e-3, zero_tol: float = 1e-12) -> Witness:
    """The ``n``-periodic points of ``X_f`` with the shift, as a model of ``X_f``.

    ``f`` must pass a Fourier nonvanishing precheck on a grid of ``2^10``
    angles: a minimum below ``zero_tol`` raises :class:`NotInvertible`, one
    below ``margin`` raises :class:`Inconclusive`.
    """
    f = GroupRingElement.of(f)
    low = fourier_min(f)
    if low <= zero_tol:
        raise NotInvertible(f"|f^| reaches {low:.3g} on the grid")
    if low < margin:
        raise Inconclusive(f"|f^| drops to {low:.3g}, below the margin {margin}")
    algebraic_fixed_points(f, n)
    pts = periodic_solutions(f, n)
    index = {p: i for i, p in enumerate(pts)}
    system = AlgebraicSystem(f.as_dict(), grid_period)
    perm = tuple(index[system.act((1,), p)] for p in pts)
    action = FiniteAction(len(pts), (perm,))
    return check_witness(system, action, pts, epsilon=epsilon)
