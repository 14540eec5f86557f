"""Decision procedures for common invariant subspaces attached to components.

For a component subset ``S`` the line projections ``P_j`` (one per matrix)
project onto the generalized eigenspaces of ``A_j`` belonging to ``S``.
The subset corresponds to a common invariant subspace exactly when the
orthogonal projections onto their ranges coincide, which is tested through
the joint spectrum of the projections: ``n`` copies of one rank-``rho``
projection have spectrum ``(x_1 + ... + x_n - x_{n+1})^rho x_{n+1}^(N-rho)``.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from jspec.algebra.linalg import as_float, eigen_clusters, eye, is_exact
from jspec.algebra.poly import MultiPoly
from jspec.algebra.scalars import ExactComplex
from jspec.config import DEFAULT_TOL, Tolerances
from jspec.decomposition import ComponentDecomposition, decompose
from jspec.pencil import (
    MatrixTuple,
    TransformMatrix,
    apply_transform,
    hyperplane_power,
    is_admissible,
    make_tuple,
    sample_admissible,
    spectrum_polynomial,
)
from jspec.projections import (
    LineLabel,
    ProjectionError,
    ProjectionFamily,
    build_family,
    line_labels,
    orthogonalize,
    projection_from_labels,
)

__all__ = [
    "AuxiliaryTuple",
    "Verdict",
    "AnalysisReport",
    "AnalysisOptions",
    "CertificateDisagreement",
    "check_selfadjoint",
    "check_general_b",
    "check_general_c",
    "permutation_test",
    "constancy_probe",
    "extract_subspace",
    "verify_invariance",
    "multiplicity_split",
    "matches_hyperplane",
    "enumerate_subsets",
    "analyze",
]

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


class CertificateDisagreement(RuntimeError):
    pass


@dataclass(frozen=True)
class AuxiliaryTuple:
    """``diag(1..N)``, the lower shift ``T`` (``T e_i = e_{i+1}``) and ``T*``."""

    Lam: np.ndarray
    T: np.ndarray
    Tstar: np.ndarray

    @classmethod
    def build(cls, N: int) -> "AuxiliaryTuple":
        Lam = eye(N, exact=True)
        T = eye(N, exact=True) * ExactComplex(0)
        for i in range(N):
            Lam[i, i] = ExactComplex(i + 1)
        for i in range(N - 1):
            T[i + 1, i] = ExactComplex(1)
        return cls(Lam, T, T.T.copy())

    def matrices(self) -> list:
        return [self.Lam, self.T, self.Tstar]


@dataclass
class Verdict:
    """Outcome of the checks for one component subset."""

    subset: tuple
    rank: int | None = None
    derived_from: tuple | None = None
    selfadjoint_check: str = SKIPPED
    general_check_b: str = SKIPPED
    general_check_c: str = SKIPPED
    permutation_sufficient: str = SKIPPED
    constancy_probe: float | None = None
    subspace: np.ndarray | None = None
    residual: float | None = None
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def authoritative(self) -> str:
        if self.selfadjoint_check != SKIPPED:
            return self.selfadjoint_check
        return self.general_check_b

    @property
    def has_subspace(self) -> bool:
        return self.subspace is not None


@dataclass
class AnalysisOptions:
    seed: int = 0
    mode: str | None = None          # None: selfadjoint iff the transformed tuple is
    subsets: list | None = None      # restrict to these subsets (component ids)
    loop_budget: int = 24
    radius: float = 0.1
    max_tries: int = 50
    permutation: bool = True
    permutation_cap: tuple = (8, 3)  # (max N, max n)
    probe: bool = True
    probe_h: float = 1e-4
    split_multiplicities: bool = True
    max_components: int = 10
    tol: Tolerances = DEFAULT_TOL


@dataclass
class AnalysisReport:
    reducible: bool
    mode: str
    decomposition: ComponentDecomposition
    verdicts: list
    shift: int
    transform: TransformMatrix
    admissibility_tries: int
    seed: int
    tol: Tolerances
    timing: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def subspaces(self) -> list:
        return [v.subspace for v in self.verdicts if v.subspace is not None]


# ---------------------------------------------------------------------------
# spectral tests


def matches_hyperplane(poly: MultiPoly, n: int, N: int, rho: int,
                       tol: Tolerances = DEFAULT_TOL) -> tuple[bool, float]:
    """Compare ``poly`` with the hyperplane-power form up to a nonzero scalar.

    Both sides are normalised by their value at ``(0, ..., 0, 1)``.
    Returns the verdict and the relative coefficient residual.
    """
    h = hyperplane_power(n, N, rho, exact=poly.exact)
    corner = (0,) * n + (N,)
    a, b = poly.coefficient(corner), h.coefficient(corner)
    if not a:
        return False, float("inf")
    if poly.exact:
        lhs = poly * (ExactComplex(1) / a)
        rhs = h * (ExactComplex(1) / b)
        return lhs == rhs, 0.0 if lhs == rhs else 1.0
    lhs = poly * (1 / complex(a))
    rhs = h * (1 / complex(b))
    keys = set(lhs.terms) | set(rhs.terms)
    scale = max(lhs.max_abs_coef(), rhs.max_abs_coef())
    diff = max(abs(complex(lhs.coefficient(e)) - complex(rhs.coefficient(e))) for e in keys)
    resid = diff / scale
    return resid <= tol.poly * 1e3, resid


def _tuple_of(mats) -> MatrixTuple:
    exact = all(is_exact(M) for M in mats)
    return make_tuple(mats if exact else [as_float(M) for M in mats], exact=exact,
                      preprocess=False)


def _spectral_test(mats, tol):
    tup = _tuple_of(mats)
    rho = _rank(mats[0])
    sp = spectrum_polynomial(tup)
    ok, resid = matches_hyperplane(sp.poly, tup.n, tup.N, rho, tol)
    return ok, resid, rho, sp


def _rank(M) -> int:
    if is_exact(M):
        tr = sum((M[i, i] for i in range(M.shape[0])), ExactComplex(0))
        return int(tr.re)
    return int(round(np.trace(as_float(M)).real))


def check_selfadjoint(family: ProjectionFamily, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Hyperplane-form test on the self-adjoint projections plus the pairwise fast path.

    Raises
    ------
    CertificateDisagreement
        If the spectral test and the pairwise-equality test disagree.
    """
    if family.mode != "selfadjoint":
        raise ValueError("check_selfadjoint needs a self-adjoint projection family")
    ok, resid, rho, sp = _spectral_test(family.P, tol)
    N = family.P[0].shape[0]
    Pf = [as_float(P) for P in family.P]
    gap = max((np.linalg.norm(a - b) for a, b in itertools.combinations(Pf, 2)), default=0.0)
    fast = gap <= tol.eq * np.sqrt(N)
    if ok != fast:
        raise CertificateDisagreement(
            f"subset {family.subset}: spectral test {'passes' if ok else 'fails'} "
            f"(residual {resid:.3e}) but max pairwise distance is {gap:.3e}"
        )
    return {"result": PASS if ok else FAIL, "rank": rho, "poly_residual": resid,
            "pairwise_gap": float(gap), "polynomial": sp.poly}


def check_general_b(family: ProjectionFamily, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Hyperplane-form test on the orthogonalized projections."""
    if not family.Q:
        raise ValueError("family has no orthogonalized projections")
    ok, resid, rho, sp = _spectral_test(family.Q, tol)
    return {"result": PASS if ok else FAIL, "rank": rho, "poly_residual": resid,
            "polynomial": sp.poly}


def permutation_test(mats, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Is the spectrum of ``(diag(1..N), T, T*, M_1, ..., M_n)`` symmetric in the ``M`` slots?"""
    N = mats[0].shape[0]
    aux = AuxiliaryTuple.build(N)
    allm = aux.matrices() + list(mats)
    tup = _tuple_of(allm)
    sp = spectrum_polynomial(tup).poly
    n = len(mats)
    worst = 0.0
    ok = True
    for a, b in itertools.combinations(range(3, 3 + n), 2):
        sw = sp.swap(a, b)
        if sp.exact:
            same = sw == sp
            ok &= same
            worst = max(worst, 0.0 if same else 1.0)
        else:
            keys = set(sp.terms) | set(sw.terms)
            diff = max(abs(sp.coefficient(e) - sw.coefficient(e)) for e in keys)
            r = diff / max(sp.max_abs_coef(), 1e-300)
            worst = max(worst, r)
            ok &= r <= tol.poly * 1e3
    return {"result": PASS if ok else FAIL, "residual": worst, "exact": sp.exact}


def _within_cap(N, n, cap):
    return N <= cap[0] and n <= cap[1]


def check_general_c(family: ProjectionFamily, cap=(8, 3), tol: Tolerances = DEFAULT_TOL) -> dict:
    """Permutation test on the orthogonalized projections."""
    N = family.P[0].shape[0]
    if not _within_cap(N, len(family.P), cap):
        return {"result": SKIPPED, "reason": f"N={N}, n={len(family.P)} above cap {cap}"}
    return permutation_test(family.Q, tol)


# ---------------------------------------------------------------------------
# constancy probe


def _relabel(M: np.ndarray, labels, tol) -> list | None:
    cl = eigen_clusters(M, tol)
    if len(cl) != len(labels):
        return None
    old = np.array([lab.value for lab in labels])
    new = np.array([v for v, _ in cl])
    rows, cols = linear_sum_assignment(np.abs(old[:, None] - new[None, :]))
    out = [None] * len(labels)
    for r, c in zip(rows, cols):
        lab = labels[r]
        if cl[c][1] != lab.multiplicity:
            return None
        out[r] = LineLabel(complex(new[c]), lab.component, lab.multiplicity)
    return out


def constancy_probe(t: MatrixTuple, d: ComponentDecomposition, S, C0: TransformMatrix | None = None,
                    h: float = 1e-4, directions=None, mode: str = "selfadjoint",
                    tol: Tolerances = DEFAULT_TOL, return_derivatives: bool = False):
    """Central-difference derivative of the first line projection in the first row of ``C``.

    ``d`` must be the decomposition of ``apply_transform(t, C0)``. For each
    direction ``delta`` of the first row, eigenvalue labels of the perturbed
    matrix are matched to those of ``A^_1`` by optimal assignment, and
    ``||P(C0 + h delta) - P(C0 - h delta)||_F / 2h`` is formed (with the
    orthogonalized projection in general mode). A perturbation that breaks
    the multiplicity profile is retried with ``h / 2`` up to four times.

    Returns the maximum norm, and the derivative matrices if requested.
    """
    n = t.n
    C = as_float(C0.C) if C0 is not None else np.eye(n, dtype=complex)
    row = C[0]
    labels = line_labels(d, 0)
    mats = t.float_matrices()
    if directions is None:
        directions = list(np.eye(n))
    S = set(S)
    worst = 0.0
    derivs = []
    for delta in directions:
        delta = np.asarray(delta, dtype=complex)
        hh = h
        for _attempt in range(5):
            vals = []
            for sign in (1, -1):
                c = row + sign * hh * delta
                M = sum(ci * A for ci, A in zip(c, mats))
                lab = _relabel(M, labels, tol)
                if lab is None:
                    vals = None
                    break
                P = projection_from_labels(M, lab, S, mode, exact=False, tol=tol)
                vals.append(orthogonalize(P, tol) if mode == "general" else P)
            if vals is not None:
                break
            hh /= 2
        else:
            raise RuntimeError(f"constancy probe: perturbation inadmissible down to h={hh * 2:.2e}")
        D = (vals[0] - vals[1]) / (2 * hh)
        derivs.append(D)
        worst = max(worst, float(np.linalg.norm(D)))
    if return_derivatives:
        return worst, derivs
    return worst


# ---------------------------------------------------------------------------
# subspaces


def extract_subspace(Q: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of ``range(Q)`` by column-pivoted QR.

    Raises
    ------
    ValueError
        If the range is trivial (rank 0 or N).
    """
    Qf = as_float(Q)
    N = Qf.shape[0]
    U, R, _ = scipy.linalg.qr(Qf, pivoting=True)
    diag = np.abs(np.diag(R))
    r = int(np.sum(diag > tol * max(diag[0] if len(diag) else 0.0, 1e-300)))
    if r == 0 or r == N:
        raise ValueError(f"trivial subspace (rank {r} of {N})")
    return U[:, :r]


def verify_invariance(t: MatrixTuple, basis: np.ndarray, tau: float | None = None,
                      tol: Tolerances = DEFAULT_TOL):
    """Residuals ``||(I - Pi) A_j Pi||_2`` for the projector ``Pi`` onto ``span(basis)``.

    Returns ``(residuals, passed)``; ``tau`` defaults to
    ``tol.inv_residual * max_j ||A_j||_2``.
    """
    V = np.asarray(basis, dtype=complex)
    Qv, _ = np.linalg.qr(V)
    Pi = Qv @ Qv.conj().T
    I = np.eye(Pi.shape[0])
    mats = t.float_matrices()
    if tau is None:
        tau = tol.inv_residual * max(max(np.linalg.norm(A, 2) for A in mats), 1.0)
    res = [float(np.linalg.norm((I - Pi) @ A @ Pi, 2)) for A in mats]
    return res, max(res) <= tau


def _cyclic_subspace(mats, v, rtol=1e-9):
    # orthonormal basis of the smallest subspace containing v and invariant under mats
    N = len(v)
    basis = np.zeros((N, 0), dtype=complex)
    queue = [v]
    while queue and basis.shape[1] < N:
        w = queue.pop()
        for _ in range(2):
            w = w - basis @ (basis.conj().T @ w)
        nw = np.linalg.norm(w)
        if nw <= rtol * max(1.0, np.linalg.norm(v)):
            continue
        w = w / nw
        basis = np.hstack([basis, w[:, None]])
        queue.extend(A @ w for A in mats)
    return basis


def multiplicity_split(t: MatrixTuple, d: ComponentDecomposition, seed: int = 0,
                       tol: Tolerances = DEFAULT_TOL) -> list:
    """Look for invariant subspaces inside components of multiplicity ``m >= 2``.

    A component of multiplicity ``m`` may belong to ``m`` copies of one
    representation, in which case no union of components separates them.
    The cyclic subspace generated by a random vector of the eigenspace of
    ``A_1`` at such a component's eigenvalue is invariant by construction;
    it is proper exactly when the copies split.

    Returns a list of ``(component id, basis)``.
    """
    rng = np.random.default_rng([seed, 7])
    mats = t.float_matrices()
    A1 = mats[0]
    N = t.N
    out = []
    for comp in d.components:
        if comp.multiplicity < 2:
            continue
        mu = comp.eigenvalues[0][0]
        _, s, vh = np.linalg.svd(A1 - mu * np.eye(N))
        k = int(np.sum(s <= 1e-7 * (1 + s[0])))
        if k == 0:
            continue
        E = vh[N - k:].conj().T
        v = E @ (rng.standard_normal(k) + 1j * rng.standard_normal(k))
        B = _cyclic_subspace(mats, v)
        if 0 < B.shape[1] < N:
            out.append((comp.id, B))
    return out


# ---------------------------------------------------------------------------


def enumerate_subsets(d: ComponentDecomposition, mode: str):
    """Nontrivial subsets to examine, as ``(subset, derived_from)`` pairs.

    In self-adjoint mode one representative per complementary pair is
    examined (the side with larger ``sum l m``) and the other is derived.
    """
    k = d.k
    ids = list(range(k))
    weight = {c.id: c.degree * c.multiplicity for c in d.components}
    out = []
    if mode == "general":
        for r in range(1, k):
            for S in itertools.combinations(ids, r):
                out.append((S, None))
        return out
    seen = set()
    for r in range(1, k):
        for S in itertools.combinations(ids, r):
            Sc = tuple(i for i in ids if i not in S)
            if S in seen or Sc in seen:
                continue
            seen.update({S, Sc})
            wS, wC = sum(weight[i] for i in S), sum(weight[i] for i in Sc)
            rep, other = (S, Sc) if (wS, Sc) >= (wC, S) else (Sc, S)
            out.append((rep, None))
            out.append((other, rep))
    return out


def _examine(That, d, S, mode, opts: AnalysisOptions, original: MatrixTuple, C: TransformMatrix):
    tol = opts.tol
    v = Verdict(subset=tuple(S))
    try:
        fam = build_family(That, d, S, mode, tol=tol)
    except ProjectionError as exc:
        v.notes.append(f"projection failed: {exc}")
        v.selfadjoint_check = FAIL if mode == "selfadjoint" else SKIPPED
        v.general_check_b = FAIL if mode == "general" else SKIPPED
        return v
    v.rank = fam.rank
    if mode == "selfadjoint":
        res = check_selfadjoint(fam, tol)
        v.selfadjoint_check = res["result"]
        v.details["poly_residual"] = res["poly_residual"]
        v.details["pairwise_gap"] = res["pairwise_gap"]
    else:
        res = check_general_b(fam, tol)
        v.general_check_b = res["result"]
        v.details["poly_residual"] = res["poly_residual"]
    if opts.permutation and _within_cap(That.N, That.n, opts.permutation_cap) and That.n >= 2:
        v.permutation_sufficient = permutation_test(fam.P, tol)["result"]
        if mode == "general":
            v.general_check_c = check_general_c(fam, opts.permutation_cap, tol)["result"]
    if opts.probe:
        try:
            v.constancy_probe = constancy_probe(That, d, S, None, opts.probe_h, mode=mode, tol=tol)
        except (RuntimeError, ProjectionError) as exc:
            v.notes.append(f"constancy probe failed: {exc}")
    if v.authoritative == PASS:
        Q1 = fam.Q[0]
        try:
            basis = extract_subspace(Q1)
        except ValueError as exc:
            v.notes.append(str(exc))
            return v
        res, ok = verify_invariance(original, basis, tol=tol)
        v.residual = max(res)
        if ok:
            v.subspace = basis
        else:
            v.notes.append(f"extracted subspace failed verification (residual {v.residual:.3e})")
    return v


def analyze(t: MatrixTuple, options: AnalysisOptions | None = None) -> AnalysisReport:
    """Preprocess, transform, decompose and test every relevant component subset.

    ``t`` should come from :func:`make_tuple` (shift applied). Subspaces are
    verified against ``t`` itself, whose invariant subspaces coincide with
    those of the unshifted and of the transformed tuple.
    """
    opts = options or AnalysisOptions()
    tol = opts.tol
    timing = {}
    t0 = time.perf_counter()
    ident = TransformMatrix.identity(t.n, exact=t.exact)
    if is_admissible(t, ident, tol):
        C, tries = ident, 0
    else:
        C, tries = sample_admissible(t, opts.seed, opts.radius, opts.max_tries, tol)
    That = apply_transform(t, C)
    mode = opts.mode or ("selfadjoint" if That.selfadjoint else "general")
    if mode == "selfadjoint" and not That.selfadjoint:
        raise ValueError("self-adjoint mode requested for a tuple that is not self-adjoint")
    timing["transform"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    d = decompose(That, seed=opts.seed, loop_budget=opts.loop_budget, tol=tol)
    timing["decompose"] = time.perf_counter() - t1
    if d.k > opts.max_components:
        raise ValueError(f"{d.k} components exceed the subset-enumeration limit {opts.max_components}")
    notes = []
    if not d.certified:
        notes.append("decomposition not certified by the trace test")

    t2 = time.perf_counter()
    if opts.subsets is not None:
        plan = [(tuple(sorted(S)), None) for S in opts.subsets]
    else:
        plan = enumerate_subsets(d, mode)
    verdicts = []
    by_subset = {}
    for S, parent in plan:
        if parent is None:
            v = _examine(That, d, S, mode, opts, t, C)
        else:
            pv = by_subset[parent]
            v = Verdict(subset=S, derived_from=parent)
            v.selfadjoint_check = pv.selfadjoint_check
            v.general_check_b = pv.general_check_b
            v.rank = t.N - pv.rank if pv.rank is not None else None
            v.notes.append("verdict derived from the complementary subset")
            if pv.subspace is not None:
                # the orthogonal complement of a reducing subspace
                full, _ = np.linalg.qr(np.hstack([pv.subspace, np.eye(t.N)]))
                comp = full[:, pv.subspace.shape[1]:t.N]
                res, ok = verify_invariance(t, comp, tol=tol)
                v.residual = max(res)
                if ok:
                    v.subspace = comp
        by_subset[S] = v
        verdicts.append(v)
    verdicts.sort(key=lambda v: (len(v.subset), v.subset))

    if opts.split_multiplicities:
        for cid, basis in multiplicity_split(That, d, opts.seed, tol):
            res, ok = verify_invariance(t, basis, tol=tol)
            v = Verdict(subset=(cid,), rank=basis.shape[1], residual=max(res))
            v.notes.append("multiplicity split: cyclic subspace inside one component")
            if ok:
                v.subspace = basis
                v.details["split"] = True
                verdicts.append(v)
    timing["subsets"] = time.perf_counter() - t2
    timing["total"] = time.perf_counter() - t0

    reducible = any(v.subspace is not None for v in verdicts)
    return AnalysisReport(reducible, mode, d, verdicts, t.shift, C, tries, opts.seed, tol,
                          timing, notes)
