"""Random tuples with known structure, for tests and fixtures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from jspec.pencil import MatrixTuple, make_tuple

__all__ = ["PlantedInstance", "plant_instance", "random_tuple", "direct_sum_instance", "DirectSumInstance"]


@dataclass
class PlantedInstance:
    """A tuple together with the subspace it was built to leave invariant.

    Attributes
    ----------
    tuple : MatrixTuple
        Preprocessed tuple.
    basis : ndarray, shape (N, d)
        Orthonormal basis of the planted subspace.
    blocks : list of ndarray
        Matrices before conjugation; ``span(e_1..e_d)`` is exactly invariant.
    conjugator : ndarray
    condition : float
        2-norm condition number of the conjugator.
    """

    tuple: MatrixTuple
    basis: np.ndarray
    blocks: list
    conjugator: np.ndarray
    condition: float
    seed: int
    selfadjoint: bool


def _gauss(rng, shape, real: bool):
    if real:
        return rng.standard_normal(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _hermitian(rng, k: int):
    G = _gauss(rng, (k, k), False)
    return (G + G.conj().T) / 2


def _conditioned(rng, N: int, conditioning: float):
    """Random matrix with 2-norm condition number exactly ``conditioning``."""
    U = unitary_group.rvs(N, random_state=rng)
    V = unitary_group.rvs(N, random_state=rng)
    if N == 1:
        s = np.ones(1)
    else:
        s = np.geomspace(1.0, conditioning, N)
        rng.shuffle(s)
    return (U * s) @ V


def plant_instance(N: int, n: int, d: int, seed: int = 0, conditioning: float = 10.0,
                   selfadjoint: bool = False, max_tries: int = 20, separation: int = 3) -> PlantedInstance:
    """Tuple with a planted ``d``-dimensional common invariant subspace.

    General variant: block upper-triangular ``[[X_j, Y_j], [0, Z_j]]`` with
    ``X_j + separation*I`` and ``Z_j - separation*I`` so that the two
    diagonal blocks have disjoint spectra on every coordinate line, then
    conjugated by one random matrix of condition number ``conditioning``.
    Self-adjoint variant: Hermitian block-diagonal, conjugated by a random
    unitary.

    Raises
    ------
    ValueError
        If ``d`` is out of range, or no draw has disjoint block spectra
        within ``max_tries``.
    """
    if not 0 < d < N:
        raise ValueError(f"need 0 < d < N, got d={d}, N={N}")
    if n < 1:
        raise ValueError("need at least one matrix")
    if conditioning < 1:
        raise ValueError("conditioning must be at least 1")
    rng = np.random.default_rng([seed, N, n, d, int(selfadjoint)])
    for _ in range(max_tries):
        blocks = []
        for _j in range(n):
            if selfadjoint:
                X = _hermitian(rng, d) + separation * np.eye(d)
                Z = _hermitian(rng, N - d) - separation * np.eye(N - d)
                Y = np.zeros((d, N - d))
            else:
                X = _gauss(rng, (d, d), False) + separation * np.eye(d)
                Z = _gauss(rng, (N - d, N - d), False) - separation * np.eye(N - d)
                Y = _gauss(rng, (d, N - d), False)
            A = np.zeros((N, N), dtype=complex)
            A[:d, :d] = X
            A[:d, d:] = Y
            A[d:, d:] = Z
            blocks.append(A)
        gap = min(
            np.min(np.abs(np.linalg.eigvals(A[:d, :d])[:, None] - np.linalg.eigvals(A[d:, d:])[None, :]))
            for A in blocks
        )
        if gap > 0.5:
            break
    else:
        raise ValueError(f"no well-separated draw within {max_tries} tries")
    if selfadjoint:
        S = unitary_group.rvs(N, random_state=rng)
        Sinv = S.conj().T
        cond = 1.0
        mats = [S @ A @ Sinv for A in blocks]
        mats = [(M + M.conj().T) / 2 for M in mats]
    else:
        S = _conditioned(rng, N, conditioning)
        Sinv = np.linalg.inv(S)
        cond = float(np.linalg.cond(S))
        mats = [S @ A @ Sinv for A in blocks]
    basis, _ = np.linalg.qr(S[:, :d])
    t = make_tuple(mats, exact=False)
    return PlantedInstance(t, basis, blocks, S, cond, seed, selfadjoint)


def random_tuple(N: int, n: int, seed: int = 0, selfadjoint: bool = False) -> MatrixTuple:
    """Dense Gaussian tuple, irreducible with probability one."""
    rng = np.random.default_rng([seed, N, n, 101 + int(selfadjoint)])
    if selfadjoint:
        mats = [_hermitian(rng, N) for _ in range(n)]
    else:
        mats = [_gauss(rng, (N, N), False) for _ in range(n)]
    return make_tuple(mats, exact=False)


@dataclass
class DirectSumInstance:
    """Conjugated direct sum with known component data.

    ``factors`` lists ``(degree, multiplicity)`` of the spectrum's
    irreducible factors.
    """

    tuple: MatrixTuple
    factors: list
    block_sizes: list


def direct_sum_instance(sizes, seed: int = 0, n: int = 2, repeat: int | None = None,
                        separation: float = 2.5) -> DirectSumInstance:
    """Direct sum of random irreducible blocks, conjugated by a random matrix.

    Each block of size ``k`` contributes a degree-``k`` factor of
    multiplicity one. If ``repeat`` is an index into ``sizes`` that block is
    included twice (an identical copy), giving a factor of multiplicity two.
    Blocks are spread apart by scalar shifts ``separation * i``.
    """
    rng = np.random.default_rng([seed, len(sizes), n, 303])
    blocks = []
    factors = []
    for i, k in enumerate(sizes):
        shift = separation * (i - (len(sizes) - 1) / 2)
        B = [_gauss(rng, (k, k), False) + shift * np.eye(k) for _ in range(n)]
        copies = 2 if repeat == i else 1
        blocks.extend([B] * copies)
        factors.append((k, copies))
    N = sum(len(B[0]) for B in blocks)
    mats = []
    for j in range(n):
        A = np.zeros((N, N), dtype=complex)
        pos = 0
        for B in blocks:
            k = len(B[j])
            A[pos:pos + k, pos:pos + k] = B[j]
            pos += k
        mats.append(A)
    S = _conditioned(rng, N, 5.0)
    Sinv = np.linalg.inv(S)
    mats = [S @ A @ Sinv for A in mats]
    return DirectSumInstance(make_tuple(mats, exact=False), sorted(factors), [len(B[0]) for B in blocks])
