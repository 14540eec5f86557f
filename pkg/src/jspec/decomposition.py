"""Irreducible decomposition of the determinantal hypersurface by monodromy.

Branches are the eigenvalue clusters of ``B(c) = sum c_j A_j`` at a base
direction ``c0``. Closed loops in direction space permute branches within
irreducible components only, so orbits of the generated group refine the
component partition. An orbit is certified complete when, along a random
affine line through ``c0``, every elementary symmetric function of its
branch values is a polynomial of the right degree: that holds exactly
when the branches cut out a polynomial factor of the determinant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from jspec.algebra.linalg import as_float
from jspec.config import DEFAULT_TOL, Tolerances
from jspec.continuation import PathSpec, TrackingError, branches_at, loop_path, track
from jspec.pencil import MatrixTuple, TupleError, _is_singular, direction_matrix

__all__ = [
    "Component",
    "ComponentDecomposition",
    "DecompositionError",
    "UnionFind",
    "decompose",
    "resample_consistency",
    "trace_certificate",
]


class DecompositionError(RuntimeError):
    pass


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return sorted(out.values())


@dataclass
class Component:
    """One irreducible component with its coordinate-line data.

    Attributes
    ----------
    degree : int
        ``l_s``, number of distinct branches.
    multiplicity : int
        ``m_s``, exponent of the factor in the determinant.
    eigenvalues : list of list of complex
        ``eigenvalues[j]`` holds the ``l_s`` eigenvalues ``1/t_{j,s,r}`` of
        ``A_{j+1}`` belonging to this component.
    """

    id: int
    degree: int
    multiplicity: int
    branches: tuple
    eigenvalues: list

    @property
    def intersections(self) -> list:
        """Coordinate-line parameters ``t_{j,s,r} = 1 / eigenvalue``."""
        return [[1 / mu for mu in row] for row in self.eigenvalues]


@dataclass
class ComponentDecomposition:
    components: list
    base_direction: np.ndarray
    base_branches: list
    assignment: tuple
    N: int
    n: int
    certified: bool
    seed: int
    loop_log: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.components)

    def profile(self) -> list:
        return sorted((c.degree, c.multiplicity) for c in self.components)

    def summary(self) -> dict:
        return {
            "components": [
                {"id": c.id, "degree": c.degree, "multiplicity": c.multiplicity}
                for c in self.components
            ],
            "certified": self.certified,
            "loops": len(self.loop_log),
        }


# ---------------------------------------------------------------------------
# trace certificate


def _elementary_symmetric(vals: np.ndarray) -> np.ndarray:
    # e_0..e_k of the columns' values; vals shape (W, k)
    W, k = vals.shape
    e = np.zeros((W, k + 1), dtype=complex)
    e[:, 0] = 1
    for i in range(k):
        e[:, 1:i + 2] = e[:, 1:i + 2] - vals[:, i:i + 1] * e[:, 0:i + 1]
    # sign convention: coefficients of prod (z - v); magnitude is what matters
    return e


def trace_certificate(w: np.ndarray, values: np.ndarray, group, tol: Tolerances = DEFAULT_TOL):
    """Residual of fitting each ``e_k`` of ``group`` by a degree-``k`` polynomial in ``w``.

    Parameters
    ----------
    w : ndarray, shape (W,)
        Real line parameters.
    values : ndarray, shape (W, K)
        Branch values at each parameter.

    Returns
    -------
    (ok, worst_relative_residual)
    """
    sub = values[:, list(group)]
    e = _elementary_symmetric(sub)
    # e_k is a sum of binom(g, k) products of k branch values
    r = float(np.max(np.abs(sub))) + 1e-300
    g = sub.shape[1]
    worst = 0.0
    for k in range(1, g + 1):
        V = np.vander(w, k + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(V, e[:, k], rcond=None)
        resid = float(np.max(np.abs(V @ coef - e[:, k])))
        scale = math.comb(g, k) * r ** k
        worst = max(worst, resid / scale)
    return worst <= tol.trace, worst


def _line_samples(t, c0, base, rng, tol, nodes):
    # track branches from c0 along c0 + w d for Chebyshev nodes w in [-1, 1]
    d = rng.standard_normal(t.n) + 1j * rng.standard_normal(t.n)
    d *= 0.5 * np.linalg.norm(c0) / np.linalg.norm(d)
    w = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    w = np.sort(w)
    neg, pos = w[w < 0][::-1], w[w > 0]
    out = {}
    for side in (neg, pos):
        if not len(side):
            continue
        wp = np.vstack([c0] + [c0 + s * d for s in side])
        res = track(t, PathSpec(wp), start=base, tol=tol)
        for s, vals in zip(side, res.values[1:]):
            out[s] = vals
    ws = np.array(sorted(out))
    return ws, np.array([out[s] for s in ws])


# ---------------------------------------------------------------------------


def _random_direction(rng, n):
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return c / np.linalg.norm(c)


def decompose(t: MatrixTuple, seed: int = 0, loop_budget: int = 24,
              tol: Tolerances = DEFAULT_TOL) -> ComponentDecomposition:
    """Group eigenvalue branches into irreducible components.

    Loops are run until every orbit passes the trace certificate or the
    budget is spent; in the latter case unions of uncertified orbits are
    searched for certified ones, and ``certified`` is False if that fails.

    Raises
    ------
    DecompositionError
        On an unstable multiplicity profile or ``sum l_s m_s != N``.
    """
    for j, M in enumerate(t.matrices):
        if _is_singular(M, tol):
            raise TupleError(f"A_{j + 1} is singular; preprocess the tuple with a shift")
    rng = np.random.default_rng(seed)
    c0 = _random_direction(rng, t.n)
    base = branches_at(t, c0, tol)
    profile = sorted(m for _, m in base)
    for _ in range(3):
        other = sorted(m for _, m in branches_at(t, _random_direction(rng, t.n), tol))
        if other != profile:
            raise DecompositionError(
                f"multiplicity profile {other} differs from base {profile}; adjust tol.cluster"
            )
    K = len(base)
    mults = [m for _, m in base]
    if sum(mults) != t.N:
        raise DecompositionError(f"branch multiplicities sum to {sum(mults)}, expected N={t.N}")

    uf = UnionFind(K)
    log = []
    nodes = K + 4 + (K % 2)  # even, so no node sits on c0
    line_rng = np.random.default_rng([seed, 1])
    line = None
    for _ in range(4):
        try:
            line = _line_samples(t, c0, base, line_rng, tol, nodes)
            break
        except TrackingError:
            continue
    if line is None:
        raise DecompositionError("could not sample a certification line")
    w, vals = line

    def uncertified():
        return [g for g in uf.groups() if not trace_certificate(w, vals, g, tol)[0]]

    pending = uncertified()
    loops = 0
    while pending and loops < loop_budget:
        loops += 1
        d = _random_direction(rng, t.n) * rng.uniform(0.2, 1.5) * np.linalg.norm(c0)
        entry = {"loop": loops}
        try:
            res = track(t, loop_path(c0, d), start=base, tol=tol)
        except TrackingError as exc:
            entry.update(status="tracking_failed", detail=str(exc))
            log.append(entry)
            continue
        merges = 0
        for i, p in enumerate(res.perm):
            if mults[i] != mults[p]:
                raise DecompositionError("monodromy mixed branches of different multiplicity")
            merges += uf.union(i, p)
        entry.update(status="ok", perm=list(res.perm), merges=merges, steps=res.steps)
        log.append(entry)
        pending = uncertified()

    certified = not pending
    if pending:
        # search unions of uncertified orbits for certified ones
        changed = True
        while changed and pending:
            changed = False
            for r in range(2, len(pending) + 1):
                for combo in itertools.combinations(range(len(pending)), r):
                    members = [i for c in combo for i in pending[c]]
                    if len({mults[i] for i in members}) != 1:
                        continue
                    if trace_certificate(w, vals, members, tol)[0]:
                        for i in members[1:]:
                            uf.union(members[0], i)
                        log.append({"loop": None, "status": "trace_merge", "members": members})
                        changed = True
                        break
                if changed:
                    break
            pending = uncertified()
        certified = not pending

    groups = uf.groups()

    # transport branch labels to each coordinate direction
    eig_rows = []
    path_rng = np.random.default_rng([seed, 2])
    for j in range(t.n):
        e_j = np.zeros(t.n, dtype=complex)
        e_j[j] = 1
        last_exc = None
        for _ in range(6):
            v = _random_direction(path_rng, t.n)
            mid = 0.5 * (c0 + e_j) + 0.3 * v
            try:
                res = track(t, PathSpec(np.vstack([c0, mid, e_j])), start=base, tol=tol)
                break
            except TrackingError as exc:
                last_exc = exc
        else:
            raise DecompositionError(f"could not transport branches to line L_{j + 1}: {last_exc}")
        # snap to the clusters of A_j for accuracy
        end = res.values[-1]
        cl = branches_at(t, e_j, tol)
        target = np.array([v for v, _ in cl])
        cost = np.abs(end[:, None] - target[None, :])
        rows, cols = linear_sum_assignment(cost)
        eig_rows.append(target[cols[np.argsort(rows)]])

    comps = []
    for g in groups:
        comps.append(Component(
            id=0,
            degree=len(g),
            multiplicity=mults[g[0]],
            branches=tuple(g),
            eigenvalues=[sorted((complex(eig_rows[j][i]) for i in g),
                                key=lambda z: (round(z.real, 9), round(z.imag, 9)))
                         for j in range(t.n)],
        ))
    comps.sort(key=lambda c: (c.degree, c.multiplicity,
                              [(round(z.real, 6), round(z.imag, 6)) for z in c.eigenvalues[0]]))
    assignment = [0] * K
    for s, c in enumerate(comps):
        c.id = s
        for i in c.branches:
            assignment[i] = s
    total = sum(c.degree * c.multiplicity for c in comps)
    if total != t.N:
        raise DecompositionError(f"sum of l_s m_s is {total}, expected N={t.N}")
    return ComponentDecomposition(
        components=comps,
        base_direction=c0,
        base_branches=[(complex(v), m) for v, m in base],
        assignment=tuple(assignment),
        N=t.N,
        n=t.n,
        certified=certified,
        seed=seed,
        loop_log=log,
    )


def _match_rows(a, b, delta):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    rows, cols = linear_sum_assignment(np.abs(a[:, None] - b[None, :]))
    return bool(np.all(np.abs(a[rows] - b[cols]) <= delta))


def resample_consistency(t: MatrixTuple, d: ComponentDecomposition, seed: int,
                         tol: Tolerances = DEFAULT_TOL) -> bool:
    """Re-run :func:`decompose` with ``seed`` and compare component data."""
    d2 = decompose(t, seed=seed, tol=tol)
    if d.profile() != d2.profile():
        return False
    scale = 1.0 + max(np.linalg.norm(as_float(M)) for M in t.matrices)
    delta = max(tol.cluster * scale, 1e-8 * scale)
    unused = list(d2.components)
    for c in d.components:
        hit = None
        for c2 in unused:
            if (c2.degree, c2.multiplicity) != (c.degree, c.multiplicity):
                continue
            if all(_match_rows(c.eigenvalues[j], c2.eigenvalues[j], delta) for j in range(t.n)):
                hit = c2
                break
        if hit is None:
            return False
        unused.remove(hit)
    return True
