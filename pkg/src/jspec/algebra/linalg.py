"""Dense matrix helpers covering both exact (object-dtype) and float matrices."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from jspec.algebra.scalars import ExactComplex, to_exact
from jspec.config import DEFAULT_TOL, Tolerances

__all__ = [
    "EigenError",
    "EigenCluster",
    "is_exact",
    "as_exact",
    "as_float",
    "eye",
    "zeros",
    "ctranspose",
    "det",
    "charpoly_exact",
    "fro_norm",
    "cluster_values",
    "eigen_clusters",
    "eigen_decompose",
    "is_hermitian",
]


class EigenError(RuntimeError):
    pass


def is_exact(M: np.ndarray) -> bool:
    return M.dtype == object


def as_exact(M) -> np.ndarray:
    M = np.asarray(M, dtype=object)
    out = np.empty(M.shape, dtype=object)
    for idx, x in np.ndenumerate(M):
        out[idx] = to_exact(x)
    return out


def as_float(M) -> np.ndarray:
    M = np.asarray(M)
    if M.dtype == object:
        return np.array([complex(x) for x in M.ravel()], dtype=complex).reshape(M.shape)
    return M.astype(complex)


def eye(N: int, exact: bool = False) -> np.ndarray:
    if not exact:
        return np.eye(N, dtype=complex)
    out = np.empty((N, N), dtype=object)
    zero, one = ExactComplex(0), ExactComplex(1)
    for i in range(N):
        for j in range(N):
            out[i, j] = one if i == j else zero
    return out


def zeros(N: int, exact: bool = False) -> np.ndarray:
    if not exact:
        return np.zeros((N, N), dtype=complex)
    out = np.empty((N, N), dtype=object)
    out.fill(ExactComplex(0))
    return out


def ctranspose(M: np.ndarray) -> np.ndarray:
    if is_exact(M):
        out = np.empty(M.shape[::-1], dtype=object)
        for (i, j), x in np.ndenumerate(M):
            out[j, i] = x.conjugate()
        return out
    return M.conj().T


def fro_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(as_float(M)))


def is_hermitian(M: np.ndarray, rtol: float = 1e-12) -> bool:
    if is_exact(M):
        return bool(np.all(M == ctranspose(M)))
    return bool(np.linalg.norm(M - M.conj().T) <= rtol * max(np.linalg.norm(M), 1.0))


def _det_exact(M: np.ndarray) -> ExactComplex:
    # Gaussian elimination over Q(i); pivots only need to be nonzero.
    A = [list(row) for row in M]
    n = len(A)
    result = ExactComplex(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if A[r][k]), None)
        if piv is None:
            return ExactComplex(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            result = -result
        pk = A[k][k]
        result = result * pk
        inv = ExactComplex(1) / pk
        for r in range(k + 1, n):
            f = A[r][k]
            if not f:
                continue
            f = f * inv
            row_r, row_k = A[r], A[k]
            for c in range(k + 1, n):
                if row_k[c]:
                    row_r[c] = row_r[c] - f * row_k[c]
    return result


def det(M: np.ndarray):
    """Determinant; exact for object-dtype input."""
    if M.shape[0] == 0:
        return ExactComplex(1) if is_exact(M) else 1.0 + 0j
    if is_exact(M):
        return _det_exact(M)
    return complex(np.linalg.det(M))


def charpoly_exact(M: np.ndarray) -> list:
    """Coefficients (low degree first) of det(zI - M) by Faddeev-LeVerrier."""
    n = M.shape[0]
    I = eye(n, exact=True)
    coeffs = [ExactComplex(0)] * (n + 1)
    coeffs[n] = ExactComplex(1)
    Mk = zeros(n, exact=True)
    for k in range(1, n + 1):
        Mk = M.dot(Mk) + I * coeffs[n - k + 1]
        AM = M.dot(Mk)
        tr = sum((AM[i, i] for i in range(n)), ExactComplex(0))
        coeffs[n - k] = tr * Fraction(-1, k)
    return coeffs


@dataclass
class EigenCluster:
    value: complex
    multiplicity: int
    basis: np.ndarray | None = None


def cluster_values(values, tol: float):
    """Single-linkage clustering of complex numbers; returns lists of indices."""
    values = np.asarray(values, dtype=complex)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _sort_key(z: complex):
    return (round(z.real, 9), round(z.imag, 9))


def eigen_clusters(M: np.ndarray, tol: Tolerances = DEFAULT_TOL):
    """Clustered eigenvalues ``[(value, multiplicity), ...]`` without bases."""
    Mf = as_float(M)
    if not np.all(np.isfinite(Mf)):
        raise EigenError("matrix has non-finite entries")
    try:
        w = np.linalg.eigvals(Mf)
    except np.linalg.LinAlgError as exc:
        raise EigenError(
            f"eigenvalue iteration failed for {Mf.shape[0]}x{Mf.shape[0]} matrix, "
            f"||M||_F={np.linalg.norm(Mf):.3e}"
        ) from exc
    delta = tol.cluster * (1.0 + np.linalg.norm(Mf))
    out = []
    for members in cluster_values(w, delta):
        out.append((complex(np.mean(w[members])), len(members)))
    out.sort(key=lambda p: _sort_key(p[0]))
    return out


def eigen_decompose(M: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> list[EigenCluster]:
    """Eigenvalue clusters of ``M`` with generalized-eigenspace bases.

    The basis of a cluster with algebraic multiplicity ``m`` spans
    ``ker (M - lambda I)^m``, read off the ``m`` smallest right singular
    vectors, so defective matrices are handled.
    """
    Mf = as_float(M)
    N = Mf.shape[0]
    clusters = []
    for value, mult in eigen_clusters(Mf, tol):
        shifted = np.linalg.matrix_power(Mf - value * np.eye(N), mult)
        _, _, vh = np.linalg.svd(shifted)
        basis = vh[N - mult:].conj().T
        clusters.append(EigenCluster(value, mult, basis))
    return clusters
