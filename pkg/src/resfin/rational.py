"""Exact rational linear algebra and a two-phase simplex with Bland's rule.

Everything here works on :class:`fractions.Fraction` (ints are accepted and
promoted).  Nothing is approximated.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

__all__ = [
    "as_fraction",
    "format_fraction",
    "rref",
    "nullspace",
    "solve_feasible",
    "linprog_exact",
]


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions, and ``"p/q"`` / decimal strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot read {value!r} as an exact rational")


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form.

    Returns ``(matrix, pivots)`` where ``pivots`` lists the pivot column of
    each nonzero row.  Zero rows are dropped.
    """
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        row_r = m[r]
        nz = [j for j in range(c, ncols) if row_r[j] != 0]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                row_i = m[i]
                for j in nz:
                    row_i[j] -= f * row_r[j]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: int):
    """Exact basis of ``{x : rows @ x = 0}``.

    Returns ``(basis, free)``: one basis vector per free column, normalized so
    that its own free coordinate is 1 and the other free coordinates are 0.
    """
    red, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis, free


class _Tableau:
    """Dense simplex tableau over Fractions, Bland's anti-cycling rule."""

    def __init__(self, a, b, basis):
        self.a = a
        self.b = b
        self.basis = basis

    def pivot(self, r, c):
        a, b = self.a, self.b
        row = a[r]
        inv = 1 / row[c]
        nz = [j for j, x in enumerate(row) if x != 0]
        for j in nz:
            row[j] *= inv
        b[r] *= inv
        for i in range(len(a)):
            if i == r:
                continue
            f = a[i][c]
            if f == 0:
                continue
            ai = a[i]
            for j in nz:
                ai[j] -= f * row[j]
            b[i] -= f * b[r]
        self.basis[r] = c

    def optimize(self, cost, allowed):
        """Minimize ``cost @ x`` over columns in ``allowed``; False if unbounded."""
        a, b, basis = self.a, self.b, self.basis
        while True:
            # reduced cost of column j: cost_j - sum_i cost_basis(i) a_ij
            entering = None
            for j in allowed:
                if j in basis:
                    continue
                red = cost[j]
                for i, bi in enumerate(basis):
                    cb = cost[bi]
                    if cb != 0 and a[i][j] != 0:
                        red -= cb * a[i][j]
                if red < 0:
                    entering = j
                    break
            if entering is None:
                return True
            best = None
            for i in range(len(a)):
                if a[i][entering] > 0:
                    ratio = b[i] / a[i][entering]
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], entering)


def _reduce_system(a_eq, b_eq, n):
    rows = [list(map(Fraction, r)) + [Fraction(v)] for r, v in zip(a_eq, b_eq)]
    red, pivots = rref(rows, n + 1)
    if pivots and pivots[-1] == n:
        return None  # 0 = 1 row
    return red


def linprog_exact(c, a_eq, b_eq, n: int | None = None):
    """Exactly minimize ``c @ x`` subject to ``a_eq @ x = b_eq``, ``x >= 0``.

    Returns ``("optimal", x, value)``, ``("infeasible", None, None)`` or
    ``("unbounded", None, None)``.
    """
    if n is None:
        n = len(c) if c is not None else len(a_eq[0])
    c = [Fraction(0)] * n if c is None else [Fraction(v) for v in c]
    red = _reduce_system(a_eq, b_eq, n) if a_eq else []
    if red is None:
        return "infeasible", None, None
    m = len(red)
    a = []
    b = []
    for i, row in enumerate(red):
        coeffs, rhs = row[:n], row[n]
        if rhs < 0:
            coeffs = [-x for x in coeffs]
            rhs = -rhs
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        a.append(coeffs + art)
        b.append(rhs)
    tab = _Tableau(a, b, [n + i for i in range(m)])
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    tab.optimize(phase1, range(n + m))
    infeas = sum(tab.b[i] for i, bi in enumerate(tab.basis) if bi >= n)
    if infeas > 0:
        return "infeasible", None, None
    # drive degenerate artificials out of the basis
    for i, bi in enumerate(list(tab.basis)):
        if bi >= n:
            col = next((j for j in range(n) if tab.a[i][j] != 0 and j not in tab.basis), None)
            if col is not None:
                tab.pivot(i, col)
    keep = [i for i, bi in enumerate(tab.basis) if bi < n]
    tab.a = [tab.a[i][:n] for i in keep]
    tab.b = [tab.b[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]
    if not tab.optimize(c, range(n)):
        return "unbounded", None, None
    x = [Fraction(0)] * n
    for i, bi in enumerate(tab.basis):
        x[bi] = tab.b[i]
    return "optimal", x, sum(ci * xi for ci, xi in zip(c, x))


def solve_feasible(a_eq, b_eq, n: int):
    """A nonnegative exact solution of ``a_eq @ x = b_eq`` or None."""
    status, x, _ = linprog_exact(None, a_eq, b_eq, n)
    return x if status == "optimal" else None


def common_denominator(values) -> int:
    out = 1
    for v in values:
        out = lcm(out, Fraction(v).denominator)
    return out
