"""Projection rounding, orthogonalization, polar correction, permutation
extraction from approximate matrix models, and the rotation-interpolated
projection on a periodized orbit.

All bounds claimed by an operation are checked at run time and reported;
a failed check raises :class:`BoundViolation`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FiniteAction
from .errors import (BoundViolation, CascadeExceeded, DeltaExceeded, HypothesisError,
                     PlacementError, Singular, SpectralGap, ThresholdExceeded, TraceMismatch)

__all__ = [
    "DEFAULT_TOLERANCES",
    "opnorm",
    "round_to_projection",
    "cut_projection",
    "orthogonalize_family",
    "polar_unitary",
    "match_permutation",
    "MatrixTuple",
    "encode_action",
    "extract_finite_action",
    "OrbitRepresentation",
    "berg_projection",
    "threshold_value",
]

DEFAULT_TOLERANCES = {
    "projection": 1e-10,
    "unitary": 1e-10,
    "gap": 1e-6,
    "delta_cap": 0.1,
    "sum": 1e-8,
    "trace": 0.4,
    "commutator": 1e-12,
    "slack": 1e-12,
}


def _tol(name, tols=None):
    if tols and name in tols:
        return tols[name]
    return DEFAULT_TOLERANCES[name]


def opnorm(a) -> float:
    """Operator (spectral) norm."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=0, rtol=0):
        return float(np.abs(np.linalg.eigvalsh(a)).max())
    return float(np.linalg.norm(a, 2))


def pairwise_norms(family):
    """``||a_i a_j||`` for ``i < j`` as a dict, computed in batches."""
    stack = np.asarray(family)
    out = {}
    for i in range(len(stack) - 1):
        prods = np.matmul(stack[i], stack[i + 1:])
        gram = np.matmul(np.conj(np.swapaxes(prods, 1, 2)), prods)
        vals = np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[:, -1], 0.0))
        for j, v in enumerate(vals, start=i + 1):
            out[(i, j)] = float(v)
    return out


def _herm(a):
    return (a + a.conj().T) / 2


def _require(ok, message):
    if not ok:
        raise BoundViolation(message)


def round_to_projection(a, gap_tol=None, tols=None):
    """Spectral projection of the self-adjoint ``a`` onto eigenvalues above 1/2."""
    gap = _tol("gap", tols) if gap_tol is None else gap_tol
    a = _herm(np.asarray(a, dtype=complex))
    w, v = np.linalg.eigh(a)
    near = np.abs(w - 0.5) < gap
    if near.any():
        raise SpectralGap(f"eigenvalue {w[near][0]:.6g} within {gap} of 1/2")
    keep = v[:, w > 0.5]
    q = keep @ keep.conj().T
    _require(opnorm(q @ q - q) <= _tol("projection", tols), "rounded matrix is not a projection")
    spread = float(np.max(np.minimum(np.abs(w), np.abs(w - 1)))) if len(w) else 0.0
    _require(opnorm(q - a) <= spread + 1e-10, "rounding moved further than the spectral distance")
    return q


@dataclass
class CutReport:
    delta: float
    q_minus_a: float
    a_defect: float
    shift: float


def cut_projection(p, q, delta_cap=None, gap_tol=None, tols=None, report=False):
    """A projection ``q'`` under ``1 - p`` close to ``q`` when ``||pq||`` is small.

    ``a = (1-p) q (1-p)`` is rounded inside the range of ``1 - p``, so
    ``(1-p) q' (1-p) = q'``.  Checked: ``||q - a|| <= 3 d``,
    ``||a^2 - a|| <= 9 d`` and ``||q' - q|| <= 6 d`` with ``d = ||pq||``.
    """
    cap = _tol("delta_cap", tols) if delta_cap is None else delta_cap
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    d = p.shape[0]
    delta = opnorm(p @ q)
    if delta >= cap:
        raise DeltaExceeded(f"||pq|| = {delta:.6g} is not below {cap}")
    one = np.eye(d)
    a = (one - p) @ q @ (one - p)
    slack = _tol("slack", tols) * max(d, 1) + 1e-12
    q_minus_a = opnorm(q - a)
    a_defect = opnorm(a @ a - a)
    _require(q_minus_a <= 3 * delta + slack, f"||q - a|| = {q_minus_a} exceeds 3||pq||")
    _require(a_defect <= 9 * delta + slack, f"||a^2 - a|| = {a_defect} exceeds 9||pq||")
    w, v = np.linalg.eigh(_herm(p))
    basis = v[:, w < 0.5]
    if basis.shape[1] == 0:
        out = np.zeros_like(q)
    else:
        comp = basis.conj().T @ q @ basis
        r = round_to_projection(comp, gap_tol, tols)
        out = basis @ r @ basis.conj().T
    shift = opnorm(out - q)
    _require(shift <= 6 * delta + slack, f"||q' - q|| = {shift} exceeds 6||pq||")
    if report:
        return out, CutReport(delta, q_minus_a, a_defect, shift)
    return out


@dataclass
class FamilyReport:
    max_deviation: float
    bound: float
    a_priori: float
    steps: list = field(default_factory=list)


def _a_priori(a, s, rho):
    """Worst-case cascade bound from ``rho`` and ``c = max ||a_i a_j||`` alone."""
    # ||a_j a_i|| = ||(a_i a_j)^*|| for self-adjoint members
    c = max(pairwise_norms(a).values(), default=0.0)
    gamma = 2 * rho + rho * rho + c
    devs = [0.0]
    for _ in range(1, len(a) - 1):
        devs.append(6 * sum(dv + gamma for dv in devs))
    return max([dv + rho for dv in devs] + [s + sum(dv + rho for dv in devs)])


def orthogonalize_family(family, sum_tol=None, delta_cap=None, gap_tol=None, tols=None, report=False):
    """An exact partition of unity ``p_1..p_n`` close to the almost-orthogonal ``a_1..a_n``.

    Each ``a_k`` (k < n) is rounded to a projection and cut away from the
    sum of the earlier ones; the last one is the complement.  The returned
    bound chains the measured cut sizes: ``||p_k - a_k|| <= ||q_k - a_k|| + 6 d_k``
    and ``||p_n - a_n|| <= ||sum a_i - 1|| + sum_{k<n} ||p_k - a_k||``.
    """
    a = [_herm(np.asarray(x, dtype=complex)) for x in family]
    n = len(a)
    if n == 0:
        raise CascadeExceeded("empty family")
    d = a[0].shape[0]
    one = np.eye(d)
    stol = _tol("sum", tols) if sum_tol is None else sum_tol
    cap = _tol("delta_cap", tols) if delta_cap is None else delta_cap
    s = opnorm(sum(a) - one)
    if s > stol:
        raise CascadeExceeded(f"||sum a_i - 1|| = {s:.3g} violates ||sum a_i - 1|| <= {stol}")
    t = max(opnorm(x @ x - x) for x in a)
    if t >= 0.25:
        raise CascadeExceeded(f"max ||a_i^2 - a_i|| = {t:.3g} violates ||a_i^2 - a_i|| < 1/4")
    rho = (1 - math.sqrt(1 - 4 * t)) / 2
    out = []
    acc = np.zeros((d, d), dtype=complex)
    bounds = []
    steps = []
    for k in range(n - 1):
        q = round_to_projection(a[k], gap_tol, tols)
        base = opnorm(q - a[k])
        if k == 0:
            p, dk = q, 0.0
        else:
            dk = opnorm(acc @ q)
            if dk >= cap:
                raise CascadeExceeded(f"step {k + 1}: ||P q|| = {dk:.3g} violates ||P q|| < {cap}")
            p = cut_projection(acc, q, cap, gap_tol, tols)
        out.append(p)
        acc = acc + p
        bounds.append(base + 6 * dk)
        steps.append(dk)
    last = one - acc
    out.append(last)
    bounds.append(s + sum(bounds))
    devs_real = [opnorm(p - x) for p, x in zip(out, a)]
    bound = max(bounds)
    if bound >= 0.5:
        raise CascadeExceeded(f"deviation bound {bound:.3g} violates bound < 1/2")
    slack = 1e-9
    for i, (dv, b) in enumerate(zip(devs_real, bounds)):
        _require(dv <= b + slack, f"||p_{i + 1} - a_{i + 1}|| = {dv} exceeds its bound {b}")
    ptol = _tol("projection", tols)
    for i in range(n):
        _require(opnorm(out[i] @ out[i] - out[i]) <= ptol, f"p_{i + 1} is not a projection")
    # projections summing to 1 are pairwise orthogonal, and the sum is 1 by construction
    _require(opnorm(sum(out) - one) <= ptol, "partition does not sum to 1")
    if report:
        return out, FamilyReport(max(devs_real), bound, _a_priori(a, s, rho), steps)
    return out


def polar_unitary(v_raw, tols=None):
    """Unitary polar factor; checks ``||v - v_raw|| <= ||v_raw v_raw^* - 1||``."""
    v_raw = np.asarray(v_raw, dtype=complex)
    u, s, vh = np.linalg.svd(v_raw)
    if s.min() < 1e-12:
        raise Singular("matrix is not invertible")
    v = u @ vh
    d = v_raw.shape[0]
    dprime = opnorm(v_raw @ v_raw.conj().T - np.eye(d))
    _require(opnorm(v - v_raw) <= dprime + 1e-12, "polar factor moved more than the unitarity defect")
    _require(opnorm(v @ v.conj().T - np.eye(d)) <= _tol("unitary", tols), "polar factor is not unitary")
    return v


def _labels(family, name):
    d = family[0].shape[0]
    out = [-1] * d
    for i, p in enumerate(family):
        diag = np.real(np.diag(p))
        off = p - np.diag(np.diag(p))
        if np.abs(off).max(initial=0) > 1e-9 or (np.abs(diag * (1 - diag)) > 1e-9).any():
            raise TraceMismatch(i + 1, f"{name} member is not a diagonal projection")
        for j in np.flatnonzero(diag > 0.5):
            if out[j] != -1:
                raise TraceMismatch(i + 1, f"{name} members overlap")
            out[j] = i
    if -1 in out:
        raise TraceMismatch(0, f"{name} does not sum to the identity")
    return out


def match_permutation(P, Q):
    """The lexicographically least permutation matrix ``w`` with ``w P_i w^* = Q_i``.

    Returns ``(w, perm)`` where ``w e_j = e_{perm[j]}``.
    """
    P = [np.asarray(x) for x in P]
    Q = [np.asarray(x) for x in Q]
    if len(P) != len(Q):
        raise TraceMismatch(0, "families of different length")
    lp, lq = _labels(P, "P"), _labels(Q, "Q")
    d = len(lp)
    perm = [0] * d
    for i in range(len(P)):
        src = [j for j in range(d) if lp[j] == i]
        dst = [j for j in range(d) if lq[j] == i]
        if len(src) != len(dst):
            raise TraceMismatch(i + 1, f"trace {len(src)} against {len(dst)}")
        for a, b in zip(src, dst):
            perm[a] = b
    w = np.zeros((d, d), dtype=int)
    for j, pj in enumerate(perm):
        w[pj, j] = 1
    for i in range(len(P)):
        conj = w @ np.rint(np.real(P[i])).astype(int) @ w.T
        _require((conj == np.rint(np.real(Q[i])).astype(int)).all(), "conjugation is not exact")
    return w, tuple(perm)


# -- microstates of finite actions ---------------------------------------------------------

@dataclass
class MatrixTuple:
    """Approximate images of a partition ``p_i``, generator unitaries ``v_k`` and
    the conjugates ``u_k p_i u_k^*`` (``conjugated[k][i]``)."""

    dimension: int
    projections: list
    unitaries: list
    conjugated: list
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        for m in self.projections + self.unitaries + [c for fam in self.conjugated for c in fam]:
            if np.asarray(m).shape != (self.dimension, self.dimension):
                raise ValueError("member dimension differs from the header")


def _perturb(rng, d, size, hermitian):
    e = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    if hermitian:
        e = _herm(e)
    return e * (size / opnorm(e))


def encode_action(action: FiniteAction, noise: float = 0.0, seed: int = 0, multiplicity: int = 1) -> MatrixTuple:
    """Indicator projections of the points and permutation unitaries, with
    independent perturbations of norm ``noise`` on every member."""
    rng = np.random.default_rng(seed)
    n = action.size
    d = n * multiplicity
    projections = []
    for i in range(n):
        p = np.zeros((d, d), dtype=complex)
        for t in range(multiplicity):
            p[i * multiplicity + t, i * multiplicity + t] = 1
        projections.append(p)
    unitaries, conjugated = [], []
    for k in range(action.rank):
        v = np.zeros((d, d), dtype=complex)
        for i in range(n):
            for t in range(multiplicity):
                v[action.generators[k][i] * multiplicity + t, i * multiplicity + t] = 1
        unitaries.append(v)
        conjugated.append([projections[action.generators[k][i]].copy() for i in range(n)])
    if noise > 0:
        projections = [p + _perturb(rng, d, noise, True) for p in projections]
        unitaries = [v + _perturb(rng, d, noise, False) for v in unitaries]
        conjugated = [[c + _perturb(rng, d, noise, True) for c in fam] for fam in conjugated]
    return MatrixTuple(d, projections, unitaries, conjugated, {"delta": noise})


def threshold_value(delta: float) -> float:
    return ((1 + delta) ** 2 + (1 + delta) + 1) * delta


@dataclass
class Extraction:
    action: FiniteAction  # on the d diagonal states
    labels: tuple  # state -> index of the projection containing it
    label_action: FiniteAction | None
    delta: float
    report: dict


def _measured_delta(t: MatrixTuple):
    d = t.dimension
    one = np.eye(d)
    ps = [np.asarray(p) for p in t.projections]
    vals = [opnorm(sum(ps) - one)]
    for i, p in enumerate(ps):
        vals.append(opnorm(p @ p - p))
        vals.append(opnorm(p - p.conj().T))
    vals.extend(pairwise_norms(ps).values())
    for k, v in enumerate(t.unitaries):
        v = np.asarray(v)
        vals.append(opnorm(v @ v.conj().T - one))
        vals.append(opnorm(v.conj().T @ v - one))
        for i, p in enumerate(ps):
            vals.append(opnorm(v @ p @ v.conj().T - np.asarray(t.conjugated[k][i])))
    return max(vals)


def extract_finite_action(t: MatrixTuple, seed: int = 0, tols=None) -> Extraction:
    """Recover a permutation action on the diagonal states of an approximate model.

    Steps: check the threshold on the measured defect; orthogonalize the
    partition and each conjugated family; polar-correct the unitaries;
    diagonalize the partition; round the conjugated families to diagonal
    projections; compare traces after conjugation by the corrected unitaries;
    and match permutations.
    """
    delta = max(float(t.tolerances.get("delta", 0.0)), _measured_delta(t))
    if threshold_value(delta) >= 0.25:
        raise ThresholdExceeded(
            f"((1+d)^2 + (1+d) + 1) d = {threshold_value(delta):.4g} is not below 1/4 at d = {delta:.4g}")
    d = t.dimension
    n = len(t.projections)
    sum_tol = max(_tol("sum", tols), 4 * n * delta + 1e-9)
    psi = orthogonalize_family(t.projections, sum_tol=sum_tol, tols=tols)
    rng = np.random.default_rng(seed)
    weights = rng.permutation(n) + 1.0
    h = sum(w * p for w, p in zip(weights, psi))
    _, basis = np.linalg.eigh(_herm(h))

    def diagonal(m):
        return basis.conj().T @ m @ basis

    diag_p = [np.diag((np.real(np.diag(diagonal(p))) > 0.5).astype(float)) for p in psi]
    labels = _labels(diag_p, "partition")
    gens = []
    report = {"delta": delta, "threshold": threshold_value(delta), "homotopy": [], "trace_gap": []}
    for k, v_raw in enumerate(t.unitaries):
        v = polar_unitary(v_raw, tols)
        conj = orthogonalize_family(t.conjugated[k], sum_tol=sum_tol, tols=tols)
        diag_c = [np.diag((np.real(np.diag(diagonal(c))) > 0.5).astype(float)) for c in conj]
        for i in range(n):
            moved = diagonal(v @ psi[i] @ v.conj().T)
            gap = opnorm(moved - diag_c[i])
            tr = abs(np.trace(moved).real - np.trace(diag_c[i]).real)
            report["homotopy"].append(gap)
            report["trace_gap"].append(tr)
            if gap >= 1 or tr >= _tol("trace", tols):
                raise TraceMismatch(i + 1, f"generator {k + 1}: distance {gap:.3g}, trace gap {tr:.3g}")
        _, perm = match_permutation(diag_p, diag_c)
        gens.append(perm)
    action = FiniteAction(d, tuple(gens))
    label_gens = []
    consistent = True
    for perm in gens:
        table = {}
        for j, pj in enumerate(perm):
            if table.setdefault(labels[j], labels[pj]) != labels[pj]:
                consistent = False
        label_gens.append(tuple(table.get(i, i) for i in range(n)))
    label_action = None
    if consistent:
        try:
            label_action = FiniteAction(n, tuple(label_gens))
        except Exception:
            label_action = None
    return Extraction(action, tuple(labels), label_action, delta, report)


# -- interpolated projections on an orbit --------------------------------------------------

@dataclass
class OrbitRepresentation:
    """Values ``f(T^j x)`` for ``j`` in the window ``[lo, lo + length)``, periodized."""

    lo: int
    values: np.ndarray

    @property
    def length(self):
        return len(self.values)

    def index(self, j):
        return (j - self.lo) % self.length

    def value(self, j):
        return self.values[self.index(j)]

    @classmethod
    def from_system(cls, system, x, lo, length, fn):
        pts = {0: x}
        cur = x
        for j in range(1, lo + length):
            cur = system.act((1,), cur)
            pts[j] = cur
        cur = x
        for j in range(-1, lo - 1, -1):
            cur = system.act((-1,), cur)
            pts[j] = cur
        return cls(lo, np.array([fn(pts[j]) for j in range(lo, lo + length)], dtype=complex))


@dataclass
class BergResult:
    v: np.ndarray
    p: np.ndarray
    shift: np.ndarray
    diag: np.ndarray
    norms: dict


def berg_projection(orbit: OrbitRepresentation, n: int, r: int, s: int) -> BergResult:
    """Rotate the orbit segments starting at ``r`` and ``s`` into each other over
    ``n`` steps of angle ``pi / 2n``.

    ``v`` agrees with the cyclic shift off the planes ``span(xi_{r+j}, xi_{s+j})``
    (``1 <= j <= n``).  ``p`` projects onto the closed ``v``-cycle
    ``zeta_0 -> ... -> zeta_{n-1} -> xi_{s+n} -> ... -> xi_{r-1} -> zeta_0``,
    which stays away from the seam of the window.
    """
    if not (r > n and s < -2 * n and n >= 1):
        raise PlacementError(f"need r > n and s < -2n (n={n}, r={r}, s={s})")
    L = orbit.length
    if L < 4 * (r - s):
        raise PlacementError(f"window length {L} is shorter than 4(r - s) = {4 * (r - s)}")
    span = range(s, r + n + 1)
    if orbit.lo > s or orbit.lo + L <= r + n:
        raise PlacementError("window does not contain [s, r + n]")
    gaps = [abs(orbit.value(r + k) - orbit.value(s + k)) for k in range(n)]
    if max(gaps) >= 1 / n:
        raise HypothesisError(f"|f(T^(r+k) x) - f(T^(s+k) x)| reaches {max(gaps):.4g}, not below 1/n")
    idx = orbit.index
    shift = np.zeros((L, L), dtype=complex)
    for j in range(L):
        shift[(j + 1) % L, j] = 1
    rot = np.eye(L, dtype=complex)
    phi = math.pi / (2 * n)
    c, si = math.cos(phi), math.sin(phi)
    for j in range(1, n + 1):
        a, b = idx(r + j), idx(s + j)
        rot[a, a], rot[a, b] = c, -si
        rot[b, a], rot[b, b] = si, c
    v = rot @ shift
    vecs = []
    for k in range(n):
        th = k * phi
        z = np.zeros(L, dtype=complex)
        z[idx(r + k)] = math.cos(th)
        z[idx(s + k)] = math.sin(th)
        vecs.append(z)
    for j in range(s + n, r):
        z = np.zeros(L, dtype=complex)
        z[idx(j)] = 1
        vecs.append(z)
    basis = np.array(vecs).T
    p = basis @ basis.conj().T
    diag = np.diag(orbit.values)
    norms = {
        "u_minus_v": opnorm(shift - v),
        "p_v": opnorm(p @ v - v @ p),
        "p_u": opnorm(p @ shift - shift @ p),
        "p_f": opnorm(p @ diag - diag @ p),
        "projection": opnorm(p @ p - p),
        "unitary": opnorm(v @ v.conj().T - np.eye(L)),
    }
    _require(norms["u_minus_v"] < 4 / n, f"||pi(u) - v|| = {norms['u_minus_v']} not below 4/n")
    _require(norms["p_v"] <= _tol("commutator"), f"||[p, v]|| = {norms['p_v']}")
    _require(norms["p_u"] < 8 / n, f"||[p, pi(u)]|| = {norms['p_u']} not below 8/n")
    _require(norms["p_f"] < 2 / n, f"||[p, pi(f)]|| = {norms['p_f']} not below 2/n")
    return BergResult(v, p, shift, diag, norms)
