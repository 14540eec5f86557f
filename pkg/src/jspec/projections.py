"""Spectral projections built as polynomials in a single matrix.

For a component subset ``S`` and line ``j`` the projection onto the sum of
generalized eigenspaces of ``A_j`` attached to ``S`` (along those attached
to the complement) is

    P = prod_{s not in S} prod_r (I - q(A_j) / q(mu_{s,r}))^{e_s},

with ``q(z) = prod_{s in S} prod_r (z - mu_{s,r})^{e_s}``, ``mu`` the
eigenvalues of ``A_j`` on each component and ``e_s`` equal to 1 for
self-adjoint tuples and to the multiplicity ``m_s`` otherwise. Each factor
equals the identity on ``S`` and is nilpotent on the eigenspace it kills.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from jspec.algebra.linalg import (
    as_exact,
    as_float,
    charpoly_exact,
    ctranspose,
    eye,
    is_exact,
)
from jspec.algebra.poly import UniPoly
from jspec.algebra.scalars import ExactComplex
from jspec.config import DEFAULT_TOL, Tolerances
from jspec.decomposition import ComponentDecomposition
from jspec.pencil import MatrixTuple

__all__ = [
    "ProjectionError",
    "ProjectionFamily",
    "LineLabel",
    "line_labels",
    "build_q",
    "build_projection",
    "projection_from_labels",
    "riesz_projection",
    "orthogonalize",
    "build_family",
    "projection_rank",
]

_GIVE_UP = 2 ** 50


class ProjectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class LineLabel:
    """Eigenvalue ``value`` of ``A_j`` belonging to component ``component``."""

    value: complex
    component: int
    multiplicity: int


def line_labels(d: ComponentDecomposition, j: int) -> list[LineLabel]:
    return [LineLabel(complex(mu), c.id, c.multiplicity)
            for c in d.components for mu in c.eigenvalues[j]]


def _exponent(label: LineLabel, mode: str) -> int:
    if mode not in ("selfadjoint", "general"):
        raise ValueError(f"unknown mode {mode!r}")
    return 1 if mode == "selfadjoint" else label.multiplicity


def _q_from_labels(labels, S, mode) -> UniPoly:
    q = UniPoly([1.0 + 0j])
    for lab in labels:
        if lab.component in S:
            q = q * UniPoly([-lab.value, 1.0 + 0j]) ** _exponent(lab, mode)
    return q


def build_q(d: ComponentDecomposition, j: int, S, mode: str) -> UniPoly:
    """``prod_{s in S} prod_r (z - mu_{j,s,r})^{e_s}`` with float coefficients."""
    return _q_from_labels(line_labels(d, j), set(S), mode)


# ---------------------------------------------------------------------------
# exact route


def _lcm_denominator(M: np.ndarray) -> int:
    D = 1
    for x in M.ravel():
        D = np.lcm(D, x.denominator).item() if D < 2 ** 62 else D * x.denominator
    return int(D)


def _rational_factor(roots, D: int):
    """Exact ``prod (z - mu)`` if it lies in Q(i)[z], else None.

    ``D * mu`` are algebraic integers when ``D`` clears the denominators of
    the matrix, so the scaled factor must have Gaussian-integer coefficients.
    """
    scaled = np.poly(np.asarray(roots, dtype=complex) * D)[::-1]  # low first
    out = []
    for k, c in enumerate(scaled):
        if abs(c) > _GIVE_UP:
            return None
        re, im = round(c.real), round(c.imag)
        if abs(c - complex(re, im)) > 1e-6 * (1 + abs(c)):
            return None
        out.append(ExactComplex(re, im) / ExactComplex(D) ** (len(roots) - k))
    # leading coefficient normalises to exactly 1
    return UniPoly(out)


def _exact_projection(M, labels, S, mode) -> np.ndarray | None:
    N = M.shape[0]
    D = _lcm_denominator(M)
    factors: dict[int, UniPoly] = {}
    comps: dict[int, list] = {}
    for lab in labels:
        comps.setdefault(lab.component, []).append(lab)
    for s, labs in comps.items():
        f = _rational_factor([lab.value for lab in labs], D)
        if f is None:
            return None
        factors[s] = f
    charpoly = UniPoly(charpoly_exact(M))
    one = UniPoly([ExactComplex(1)])
    q, h = one, one
    for s, labs in comps.items():
        e = _exponent(labs[0], mode)
        if s in S:
            q = q * factors[s] ** e
        else:
            h = h * factors[s] ** e
    # certificate: the chosen factors are genuine factors of the characteristic polynomial
    full = one
    for s, labs in comps.items():
        full = full * factors[s] ** labs[0].multiplicity
    if full != charpoly:
        return None
    if h.degree == 0:
        return eye(N, exact=True)
    # G(y) = prod over roots mu of h of (y - q(mu)); then P = G(q(M)) / G(0)
    C = _companion(h)
    qC = q.eval_matrix(C)
    G = UniPoly(charpoly_exact(qC))
    g0 = G.coeffs[0] if G.coeffs else ExactComplex(0)
    if not g0:
        raise ProjectionError("a complement eigenvalue is a root of q; tuple not admissible for S")
    return G.eval_matrix(q.eval_matrix(M)) * (ExactComplex(1) / g0)


def _companion(h: UniPoly) -> np.ndarray:
    h = h.monic()
    k = h.degree
    C = eye(k, exact=True) * ExactComplex(0)
    for i in range(1, k):
        C[i, i - 1] = ExactComplex(1)
    for i in range(k):
        C[i, k - 1] = -h.coeffs[i]
    return C


# ---------------------------------------------------------------------------


def projection_from_labels(M: np.ndarray, labels, S, mode: str, exact: bool | None = None,
                           tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Functional-calculus projection of ``M`` onto the eigenvalues labelled by ``S``.

    Parameters
    ----------
    labels : list of LineLabel
        Every distinct eigenvalue of ``M`` with its component.
    exact : bool, optional
        Try the exact route (exact ``M`` and rational component factors);
        by default whenever ``M`` is exact. Falls back to floats when the
        factors are irrational.
    """
    S = set(S)
    N = M.shape[0]
    if not any(lab.component not in S for lab in labels):
        return eye(N, exact=is_exact(M) and exact is not False)
    if exact is None:
        exact = is_exact(M)
    if exact and is_exact(M):
        P = _exact_projection(M, labels, S, mode)
        if P is not None:
            return P
    Mf = as_float(M)
    q = _q_from_labels(labels, S, mode)
    qM = q.eval_matrix(Mf)
    scale = max(1.0, *(abs(q(lab.value)) for lab in labels)) if labels else 1.0
    I = np.eye(N, dtype=complex)
    P = I.copy()
    for lab in labels:
        if lab.component in S:
            continue
        qv = q(lab.value)
        if abs(qv) <= tol.cluster * scale:
            raise ProjectionError(
                f"q vanishes at complement eigenvalue {lab.value:.6g}; tuple not admissible for S"
            )
        F = I - qM / qv
        for _ in range(_exponent(lab, mode)):
            P = P @ F
    return P


def build_projection(t: MatrixTuple, d: ComponentDecomposition, j: int, S, mode: str,
                     exact: bool | None = None, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Projection for line ``j`` (0-based) and component subset ``S``."""
    return projection_from_labels(t.matrices[j], line_labels(d, j), S, mode, exact, tol)


def riesz_projection(M: np.ndarray, group, quad_nodes: int = 64,
                     tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Contour-integral spectral projection for the eigenvalues in ``group``.

    Each eigenvalue gets its own circle of radius half the distance to the
    nearest excluded eigenvalue; the trapezoid rule on a circle converges
    geometrically for this analytic integrand.

    Raises
    ------
    ProjectionError
        If a group eigenvalue lies within ``3 delta_cluster`` of an excluded one.
    """
    Mf = as_float(M)
    N = Mf.shape[0]
    evals = np.linalg.eigvals(Mf)
    delta = tol.cluster * (1 + np.linalg.norm(Mf))
    group = [complex(g) for g in group]
    in_group = np.zeros(N, dtype=bool)
    for g in group:
        in_group |= np.abs(evals - g) <= max(3 * delta, 1e-6 * (1 + abs(g)))
    outside = evals[~in_group]
    I = np.eye(N, dtype=complex)
    P = np.zeros((N, N), dtype=complex)
    theta = 2 * np.pi * (np.arange(quad_nodes) + 0.5) / quad_nodes
    for g in group:
        gap = float(np.min(np.abs(outside - g))) if len(outside) else 1.0
        others = [h for h in group if h != g]
        if others:
            gap = min(gap, min(abs(h - g) for h in others))
        if gap <= 3 * delta:
            raise ProjectionError(
                f"eigenvalue {g:.6g} is within {gap:.2e} of another; "
                f"contour radius would need to be below {gap / 2:.2e}"
            )
        r = gap / 2
        for th in theta:
            z = r * np.exp(1j * th)
            P += z * np.linalg.solve((g + z) * I - Mf, I)
    return P / quad_nodes


def orthogonalize(P: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection onto ``range(P)`` as a polynomial in ``H = P P*``.

    With ``mu_t`` the distinct positive eigenvalues of ``H``,
    ``Q(z) = 1 - prod_t (1 - z / mu_t)`` vanishes at 0 and equals 1 at every
    ``mu_t``, so ``Q(H)`` is the orthogonal projection onto ``range(H)``.
    Exact input is handled exactly through the characteristic polynomial
    of ``H`` with its zero roots divided out.

    Raises
    ------
    ProjectionError
        If ``H`` has an eigenvalue in the dead zone ``[delta, 10 delta]``.
    """
    N = P.shape[0]
    if is_exact(P):
        H = P.dot(ctranspose(P))
        cp = charpoly_exact(H)
        z = next(i for i, c in enumerate(cp) if c)  # multiplicity of the zero root
        g = UniPoly(cp[z:])
        if g.degree == 0:
            return eye(N, exact=True) * ExactComplex(0)
        Qpoly = UniPoly([ExactComplex(1)]) - g * (ExactComplex(1) / g.coeffs[0])
        return Qpoly.eval_matrix(H)
    Pf = as_float(P)
    H = Pf @ Pf.conj().T
    H = (H + H.conj().T) / 2
    w = np.linalg.eigvalsh(H)
    top = float(w[-1]) if len(w) else 0.0
    delta = tol.psd * max(top, 1e-300)
    dead = w[(w >= delta) & (w <= 10 * delta)]
    if len(dead):
        raise ProjectionError(
            f"ill-conditioned projection: P P* eigenvalue {dead[0]:.3e} lies in the dead zone "
            f"[{delta:.3e}, {10 * delta:.3e}]"
        )
    pos = np.sort(w[w > 10 * delta])
    distinct = []
    for mu in pos:
        if not distinct or mu - distinct[-1] > 1e-10 * top:
            distinct.append(mu)
    I = np.eye(N, dtype=complex)
    R = I.copy()
    for mu in distinct:
        R = R @ (I - H / mu)
    Q = I - R
    return (Q + Q.conj().T) / 2


def projection_rank(P: np.ndarray) -> int:
    """Rank of an idempotent as its trace, rounded in float mode."""
    tr = sum((P[i, i] for i in range(P.shape[0])), ExactComplex(0) if is_exact(P) else 0j)
    if is_exact(P):
        if tr.im != 0 or tr.re.denominator != 1:
            raise ProjectionError(f"trace {tr} of an exact idempotent is not an integer")
        return int(tr.re)
    return int(round(complex(tr).real))


@dataclass
class ProjectionFamily:
    """Projections ``P_j`` and orthogonalizations ``Q_j`` for one subset."""

    subset: tuple
    mode: str
    P: list
    Q: list
    rank: int
    exact: list = field(default_factory=list)


def build_family(t: MatrixTuple, d: ComponentDecomposition, S, mode: str,
                 exact: bool | None = None, tol: Tolerances = DEFAULT_TOL,
                 with_q: bool = True) -> ProjectionFamily:
    S = tuple(sorted(S))
    P = [build_projection(t, d, j, S, mode, exact, tol) for j in range(t.n)]
    Q = [orthogonalize(Pj, tol) for Pj in P] if with_q else []
    rank = projection_rank(P[0])
    return ProjectionFamily(S, mode, P, Q, rank, [is_exact(Pj) for Pj in P])
