"""Matrix tuples, their linear pencils and determinant polynomials.

A tuple ``(A_1, ..., A_n)`` of ``N x N`` matrices defines the pencil
``A(x) = x_1 A_1 + ... + x_n A_n - x_{n+1} I``. Its determinant is a
homogeneous form of degree ``N`` in ``n + 1`` variables whose zero set is
the projective joint spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from jspec.algebra.linalg import (
    as_exact,
    as_float,
    det,
    eigen_clusters,
    eye,
    fro_norm,
    is_exact,
    is_hermitian,
)
from jspec.algebra.poly import MultiPoly, interpolate_homogeneous
from jspec.algebra.scalars import ExactComplex, is_exact_scalar, to_exact
from jspec.config import DEFAULT_TOL, Tolerances

__all__ = [
    "MatrixTuple",
    "TransformMatrix",
    "SpectrumPolynomial",
    "AdmissibilityResult",
    "TupleError",
    "make_tuple",
    "evaluate_pencil",
    "direction_matrix",
    "spectrum_polynomial",
    "apply_transform",
    "is_admissible",
    "sample_admissible",
    "generic_profile",
    "hyperplane_power",
]


class TupleError(ValueError):
    pass


def _freeze(M: np.ndarray) -> np.ndarray:
    M = M.copy()
    M.flags.writeable = False
    return M


@dataclass(frozen=True)
class MatrixTuple:
    """An ordered tuple of square matrices with preprocessing metadata.

    Attributes
    ----------
    matrices : tuple of ndarray
        Object dtype (:class:`ExactComplex` entries) or complex dtype.
    selfadjoint : bool
        True iff every matrix is Hermitian.
    shift : int
        Integer ``t`` already added to every matrix (``A_j + t I``).
    """

    matrices: tuple
    selfadjoint: bool
    shift: int = 0

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def N(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def exact(self) -> bool:
        return all(is_exact(M) for M in self.matrices)

    def __getitem__(self, j):
        return self.matrices[j]

    def __iter__(self):
        return iter(self.matrices)

    def as_float(self) -> "MatrixTuple":
        return MatrixTuple(tuple(_freeze(as_float(M)) for M in self.matrices),
                           self.selfadjoint, self.shift)

    def float_matrices(self) -> list[np.ndarray]:
        return [as_float(M) for M in self.matrices]

    def unshifted(self) -> "MatrixTuple":
        """The tuple before the recorded shift."""
        if not self.shift:
            return self
        I = eye(self.N, exact=self.exact)
        t = ExactComplex(self.shift) if self.exact else float(self.shift)
        return MatrixTuple(tuple(_freeze(M - I * t) for M in self.matrices),
                           self.selfadjoint, 0)

    def max_norm(self) -> float:
        return max(fro_norm(M) for M in self.matrices)


def _coerce_matrix(M, index: int, exact: bool | None):
    try:
        arr = np.array(M, dtype=object)
    except ValueError as exc:
        raise TupleError(f"matrix {index + 1} is ragged") from exc
    if arr.ndim != 2:
        raise TupleError(f"matrix {index + 1} is not two-dimensional (shape {arr.shape})")
    if arr.shape[0] != arr.shape[1]:
        raise TupleError(f"matrix {index + 1} is not square (shape {arr.shape[0]}x{arr.shape[1]})")
    entries_exact = all(is_exact_scalar(x) or isinstance(x, str) for x in arr.ravel())
    if exact is None:
        exact = entries_exact
    if exact:
        return as_exact(arr)
    return as_float(np.array([[complex(x) if not isinstance(x, str) else complex(to_exact(x))
                               for x in row] for row in arr], dtype=complex))


def _is_singular(M: np.ndarray, tol: Tolerances) -> bool:
    if is_exact(M):
        return not det(M)
    N = M.shape[0]
    smin = np.linalg.svd(M, compute_uv=False)[-1]
    return smin <= tol.inv * N * max(np.linalg.norm(M), 1e-300)


def _spectral_radius(M: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(as_float(M)))))


def make_tuple(matrices, *, exact: bool | None = None, preprocess: bool = True,
               shift: int | None = None, tol: Tolerances = DEFAULT_TOL) -> MatrixTuple:
    """Validate matrices and build a :class:`MatrixTuple`.

    Parameters
    ----------
    matrices : sequence of array-like
        Entries may be ints, Fractions, rational strings, :class:`ExactComplex`
        (exact mode) or floats/complex (float mode).
    exact : bool, optional
        Force exact or float storage; inferred from the entries by default.
    preprocess : bool
        If any matrix is singular, add the smallest positive integer ``t``
        with every ``A_j + t I`` invertible. Such ``t`` never exceeds
        ``floor(max spectral radius) + 1``.
    shift : int, optional
        Apply this shift unconditionally instead.
    """
    matrices = list(matrices)
    if not matrices:
        raise TupleError("a tuple needs at least one matrix")
    if exact is None:
        flat = [x for M in matrices for x in np.array(M, dtype=object).ravel()]
        exact = all(is_exact_scalar(x) or isinstance(x, str) for x in flat)
    mats = [_coerce_matrix(M, i, exact) for i, M in enumerate(matrices)]
    N = mats[0].shape[0]
    for i, M in enumerate(mats):
        if M.shape != (N, N):
            raise TupleError(f"matrix {i + 1} has size {M.shape[0]}, expected {N}")
    if not exact:
        for i, M in enumerate(mats):
            if not np.all(np.isfinite(M)):
                raise TupleError(f"matrix {i + 1} has non-finite entries")
    selfadjoint = all(is_hermitian(M) for M in mats)

    t = 0
    if shift is not None:
        t = int(shift)
    elif preprocess and any(_is_singular(M, tol) for M in mats):
        bound = int(np.floor(max(_spectral_radius(M) for M in mats))) + 1
        for cand in range(1, bound + 1):
            I = eye(N, exact=exact)
            c = ExactComplex(cand) if exact else float(cand)
            if not any(_is_singular(M + I * c, tol) for M in mats):
                t = cand
                break
        else:
            t = bound
    if t:
        I = eye(N, exact=exact)
        c = ExactComplex(t) if exact else float(t)
        mats = [M + I * c for M in mats]
    return MatrixTuple(tuple(_freeze(M) for M in mats), selfadjoint, t)


def evaluate_pencil(t: MatrixTuple, x) -> np.ndarray:
    """``x_1 A_1 + ... + x_n A_n - x_{n+1} I``; exact for exact tuple and point."""
    x = list(x)
    if len(x) != t.n + 1:
        raise TupleError(f"point has length {len(x)}, pencil needs {t.n + 1}")
    exact = t.exact and all(is_exact_scalar(v) for v in x)
    if exact:
        x = [to_exact(v) for v in x]
        out = eye(t.N, exact=True) * (-x[-1])
        for c, M in zip(x, t.matrices):
            if c:
                out = out + M * c
        return out
    out = -complex(x[-1]) * np.eye(t.N, dtype=complex)
    for c, M in zip(x, t.matrices):
        out = out + complex(c) * as_float(M)
    return out


def direction_matrix(t: MatrixTuple, c) -> np.ndarray:
    """Float ``B(c) = sum_j c_j A_j``."""
    out = np.zeros((t.N, t.N), dtype=complex)
    for cj, M in zip(c, t.matrices):
        out += complex(cj) * as_float(M)
    return out


@dataclass(frozen=True)
class SpectrumPolynomial:
    """``det A(x)`` as a homogeneous form, normalized by ``p(0,...,0,1) = (-1)^N``."""

    poly: MultiPoly
    n: int
    N: int

    @property
    def exact(self) -> bool:
        return self.poly.exact

    def __call__(self, x):
        return self.poly(x)


def spectrum_polynomial(t: MatrixTuple, exact: bool | None = None,
                        check: bool = True) -> SpectrumPolynomial:
    """Interpolate the determinant of the pencil of ``t``.

    Exact tuples give exact polynomials unless ``exact=False``.
    """
    n, N = t.n, t.N
    if exact is None:
        exact = t.exact
    if exact and not t.exact:
        raise TupleError("exact spectrum polynomial requires an exact tuple")
    if exact:
        poly = interpolate_homogeneous(lambda x: det(evaluate_pencil(t, x)), n + 1, N,
                                       check=check, exact=True)
    else:
        mats = np.stack(t.float_matrices() + [-np.eye(N, dtype=complex)])

        def batch(P):
            return np.linalg.det(np.tensordot(P, mats, axes=([1], [0])))

        poly = interpolate_homogeneous(batch, n + 1, N, check=check, batched=True)
        lead = poly.coefficient((0,) * n + (N,))
        target = (-1) ** N
        if abs(lead - target) > 1e-6:
            raise TupleError(f"pencil normalization off: p(0,..,0,1) = {lead}")
        poly = (poly * (target / lead)).chop(1e-14)
    return SpectrumPolynomial(poly, n, N)


def hyperplane_power(n: int, N: int, rho: int, exact: bool = True) -> MultiPoly:
    """``(x_1 + ... + x_n - x_{n+1})^rho * x_{n+1}^(N - rho)``."""
    one = ExactComplex(1) if exact else 1.0 + 0j
    lin = MultiPoly.linear_form([one] * n + [-one])
    last = MultiPoly.variable(n + 1, n, exact=exact)
    return lin ** rho * last ** (N - rho)


@dataclass(frozen=True)
class TransformMatrix:
    """Invertible ``n x n`` recombination ``A_j -> sum_s C[j, s] A_s``."""

    C: np.ndarray
    real: bool

    @classmethod
    def of(cls, C) -> "TransformMatrix":
        C = np.asarray(C)
        if C.dtype == object:
            C = as_exact(C)
            real = all(x.im == 0 for x in C.ravel())
        else:
            C = as_float(C)
            real = bool(np.all(C.imag == 0))
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise TupleError(f"transform must be square, got shape {C.shape}")
        return cls(_freeze(C), real)

    @classmethod
    def identity(cls, n: int, exact: bool = True) -> "TransformMatrix":
        return cls.of(eye(n, exact=exact))

    @property
    def exact(self) -> bool:
        return is_exact(self.C)

    def is_invertible(self) -> bool:
        if self.exact:
            return bool(det(self.C))
        s = np.linalg.svd(self.C, compute_uv=False)
        return s[-1] > 1e-12 * s[0]

    def extended(self) -> np.ndarray:
        """The ``(n+1) x (n+1)`` matrix acting on pencil coordinates.

        With it, ``det of the transformed pencil at x`` equals
        ``det of the original pencil at x @ extended()``.
        """
        n = self.C.shape[0]
        out = eye(n + 1, exact=self.exact)
        out[:n, :n] = self.C
        return out

    def is_identity(self) -> bool:
        n = self.C.shape[0]
        return bool(np.all(as_float(self.C) == np.eye(n)))


def apply_transform(t: MatrixTuple, C: TransformMatrix) -> MatrixTuple:
    """Return ``(A^_1, ..., A^_n)`` with ``A^_j = sum_s C[j, s] A_s``."""
    if C.C.shape != (t.n, t.n):
        raise TupleError(f"transform is {C.C.shape[0]}x{C.C.shape[1]}, tuple has n={t.n}")
    if not C.is_invertible():
        raise TupleError("transform matrix is singular")
    exact = t.exact and C.exact
    mats = []
    for j in range(t.n):
        if exact:
            acc = eye(t.N, exact=True) * ExactComplex(0)
            for s in range(t.n):
                if C.C[j, s]:
                    acc = acc + t.matrices[s] * C.C[j, s]
        else:
            acc = np.zeros((t.N, t.N), dtype=complex)
            for s in range(t.n):
                acc = acc + complex(C.C[j, s]) * as_float(t.matrices[s])
        mats.append(_freeze(acc))
    sa = t.selfadjoint and C.real
    return MatrixTuple(tuple(mats), sa, t.shift)


# ---------------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibilityResult:
    ok: bool
    diagnostics: list = field(default_factory=list)
    profile: tuple = ()
    margins: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def generic_profile(t: MatrixTuple, tol: Tolerances = DEFAULT_TOL, seed: int = 20240531,
                    trials: int = 3) -> tuple:
    """Sorted cluster multiplicities of ``B(c)`` at random complex directions.

    Raises ``RuntimeError`` if the random directions disagree.
    """
    rng = np.random.default_rng(seed)
    profiles = []
    for _ in range(trials):
        c = rng.standard_normal(t.n) + 1j * rng.standard_normal(t.n)
        profiles.append(tuple(sorted(m for _, m in eigen_clusters(direction_matrix(t, c), tol))))
    # two of three agreeing is enough to reject an unlucky draw
    for p in profiles:
        if profiles.count(p) >= 2:
            return p
    raise RuntimeError(f"multiplicity profile unstable across directions: {profiles}")


def is_admissible(t: MatrixTuple, C: TransformMatrix, tol: Tolerances = DEFAULT_TOL,
                  profile: tuple | None = None) -> AdmissibilityResult:
    """Test whether ``C`` makes every coordinate-line intersection regular.

    For each ``j`` the eigenvalue clusters of ``A^_j`` must have the same
    multiplicity profile as ``B(c)`` at generic directions, so no two
    branches collide on the coordinate line, every ``A^_j`` must be
    invertible (no intersection at infinity), and the distinct eigenvalues
    must be separated by more than ``tol.reg`` relative to the spectral
    scale, which bounds the derivative of the reduced restriction away from
    zero at each root.
    """
    diags = []
    if not C.is_invertible():
        return AdmissibilityResult(False, ["C not invertible"])
    if t.selfadjoint and not C.real:
        return AdmissibilityResult(False, ["C must be real for a self-adjoint tuple"])
    That = apply_transform(t, C)
    if profile is None:
        profile = generic_profile(t, tol)
    margins = {}
    for j, M in enumerate(That.matrices):
        if _is_singular(M if not is_exact(M) else M, tol):
            diags.append(f"A^_{j + 1} is singular")
            continue
        cl = eigen_clusters(M, tol)
        prof = tuple(sorted(m for _, m in cl))
        if prof != profile:
            collided = [v for v, m in cl if m not in profile or prof.count(m) != profile.count(m)]
            diags.append(
                f"line L_{j + 1}: multiplicity profile {prof} differs from generic {profile}"
                + (f" near eigenvalue(s) {', '.join(f'{v:.6g}' for v in collided[:3])}" if collided else "")
            )
            continue
        vals = np.array([v for v, _ in cl])
        scale = 1.0 + float(np.max(np.abs(vals)))
        gaps = [float(np.min(np.abs(np.delete(vals, i) - vals[i]))) if len(vals) > 1 else scale
                for i in range(len(vals))]
        margin = min(gaps) / scale
        margins[j] = margin
        if margin <= tol.reg:
            i = int(np.argmin(gaps))
            diags.append(f"line L_{j + 1}: root 1/{vals[i]:.6g} not regular (margin {margin:.2e})")
    return AdmissibilityResult(not diags, diags, profile, margins)


def _dyadic(x: float, denom: int = 1024) -> Fraction:
    return Fraction(round(x * denom), denom)


def sample_admissible(t: MatrixTuple, seed: int = 0, radius: float = 0.1, max_tries: int = 50,
                      tol: Tolerances = DEFAULT_TOL) -> tuple[TransformMatrix, int]:
    """Draw ``C = I + radius R`` until it is admissible.

    ``R`` has entries uniform in ``[-1, 1]`` (real for self-adjoint tuples,
    complex otherwise). Entries are rounded to multiples of 1/1024 so exact
    tuples stay exact. Returns the transform and the number of tries used.

    Raises
    ------
    RuntimeError
        When ``max_tries`` draws all fail; carries the last diagnostics.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    n = t.n
    if radius == 0:
        C = TransformMatrix.identity(n, exact=t.exact)
        res = is_admissible(t, C, tol)
        if res:
            return C, 1
        raise RuntimeError(f"identity is not admissible: {'; '.join(res.diagnostics)}")
    rng = np.random.default_rng(seed)
    profile = generic_profile(t, tol)
    last = None
    for k in range(1, max_tries + 1):
        R = rng.uniform(-1, 1, (n, n))
        Ri = np.zeros((n, n)) if t.selfadjoint else rng.uniform(-1, 1, (n, n))
        entries = np.empty((n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                re = _dyadic((a == b) + radius * R[a, b])
                im = _dyadic(radius * Ri[a, b])
                entries[a, b] = ExactComplex(re, im)
        C = TransformMatrix.of(entries if t.exact else as_float(entries))
        res = is_admissible(t, C, tol, profile)
        if res:
            return C, k
        last = res
    raise RuntimeError(
        f"no admissible transform in {max_tries} tries at radius {radius}: "
        + "; ".join(last.diagnostics if last else [])
    )
