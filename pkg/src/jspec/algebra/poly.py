"""Sparse multivariate and dense univariate polynomials over Q(i) or C.

Coefficients are either all :class:`ExactComplex` (exact mode) or all
Python ``complex`` (float mode).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from jspec.algebra.linalg import as_float, cluster_values, eye, is_exact
from jspec.algebra.scalars import ExactComplex, to_exact
from jspec.config import DEFAULT_TOL, Tolerances

__all__ = [
    "MultiPoly",
    "UniPoly",
    "InterpolationError",
    "poly_eval",
    "interpolate_homogeneous",
    "uni_roots",
    "simplex_points",
]


class InterpolationError(ValueError):
    pass


def _is_zero(c) -> bool:
    return not c


def _exact_coef(c) -> bool:
    return isinstance(c, ExactComplex)


class MultiPoly:
    """Polynomial in ``nvars`` variables stored as ``{exponent tuple: coefficient}``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {nvars}")
            if not _is_zero(c):
                clean[e] = c
        self.terms = clean

    # -- constructors ---------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int, exact: bool = True) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): ExactComplex(1) if exact else 1.0 + 0j})

    @classmethod
    def linear_form(cls, coeffs) -> "MultiPoly":
        nvars = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * nvars
            e[i] = 1
            terms[tuple(e)] = c
        return cls(nvars, terms)

    # -- properties -----------------------------------------------------
    @property
    def exact(self) -> bool:
        return all(_exact_coef(c) for c in self.terms.values())

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    @property
    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponent):
        return self.terms.get(tuple(exponent), ExactComplex(0) if self.exact else 0j)

    def max_abs_coef(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    def to_float(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: complex(c) for e, c in self.terms.items()})

    def chop(self, rtol: float) -> "MultiPoly":
        """Drop float coefficients below ``rtol`` times the largest one."""
        if self.exact:
            return self
        cut = rtol * self.max_abs_coef()
        return MultiPoly(self.nvars, {e: c for e, c in self.terms.items() if abs(c) > cut})

    # -- arithmetic -----------------------------------------------------
    def _zero_like(self):
        return ExactComplex(0) if self.exact else 0j

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.nvars, other)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return MultiPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            if _is_zero(other):
                return MultiPoly(self.nvars)
            return MultiPoly(self.nvars, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                terms[e] = terms[e] + v if e in terms else v
        return MultiPoly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(self.nvars, ExactComplex(1) if self.exact else 1.0 + 0j)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def _check(self, other):
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def allclose(self, other: "MultiPoly", rtol: float = 1e-9) -> bool:
        self._check(other)
        scale = max(self.max_abs_coef(), other.max_abs_coef(), 1e-300)
        keys = set(self.terms) | set(other.terms)
        diff = max((abs(complex(self.coefficient(e)) - complex(other.coefficient(e))) for e in keys),
                   default=0.0)
        return diff <= rtol * scale

    # -- variable manipulations ----------------------------------------
    def permute(self, perm) -> "MultiPoly":
        """Return ``q`` with ``q(x) = p(x[perm[0]], ..., x[perm[-1]])``."""
        perm = list(perm)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * self.nvars
            for k, src in enumerate(perm):
                ne[src] += e[k]
            out[tuple(ne)] = c
        return MultiPoly(self.nvars, out)

    def swap(self, i: int, j: int) -> "MultiPoly":
        perm = list(range(self.nvars))
        perm[i], perm[j] = perm[j], perm[i]
        return self.permute(perm)

    def compose_linear(self, M) -> "MultiPoly":
        """Return ``x -> p(x M)`` for an ``nvars x nvars`` matrix ``M``."""
        M = np.asarray(M)
        forms = [MultiPoly.linear_form([M[i, k] for i in range(self.nvars)])
                 for k in range(self.nvars)]
        powers: dict = {}

        def pw(k, a):
            if (k, a) not in powers:
                powers[(k, a)] = forms[k] ** a
            return powers[(k, a)]

        one = ExactComplex(1) if self.exact else 1.0 + 0j
        total = MultiPoly(self.nvars)
        for e, c in self.terms.items():
            term = MultiPoly.constant(self.nvars, one)
            for k, a in enumerate(e):
                if a:
                    term = term * pw(k, a)
            total = total + term * c
        return total

    def __call__(self, point):
        return poly_eval(self, point)

    def __repr__(self):
        if not self.terms:
            return "MultiPoly(0)"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _horner(terms: list, var: int, point, zero):
    # terms: list of (exponent tuple, coef); nested Horner on variable ``var``
    if not terms:
        return zero
    if var == len(point):
        return sum((c for _, c in terms), zero)
    by_power: dict[int, list] = {}
    for e, c in terms:
        by_power.setdefault(e[var], []).append((e, c))
    top = max(by_power)
    acc = zero
    for k in range(top, -1, -1):
        acc = acc * point[var] + _horner(by_power.get(k, []), var + 1, point, zero)
    return acc


def poly_eval(p: MultiPoly, point):
    """Evaluate ``p`` at ``point`` by nested Horner; exact for exact inputs."""
    point = list(point)
    if len(point) != p.nvars:
        raise ValueError(f"point has length {len(point)}, polynomial has {p.nvars} variables")
    exact = p.exact and all(isinstance(x, (ExactComplex, int, Fraction)) for x in point)
    if exact:
        point = [to_exact(x) for x in point]
        zero = ExactComplex(0)
    else:
        point = [complex(x) for x in point]
        zero = 0j
        p = p.to_float() if p.exact else p
    return _horner(list(p.terms.items()), 0, point, zero)


# ---------------------------------------------------------------------------
# homogeneous interpolation on the integer simplex lattice


@lru_cache(maxsize=None)
def _stirling1(N: int) -> tuple:
    """Signed Stirling numbers of the first kind s(k, b), 0 <= b <= k <= N."""
    s = [[0] * (N + 1) for _ in range(N + 1)]
    s[0][0] = 1
    for k in range(1, N + 1):
        for b in range(1, k + 1):
            s[k][b] = s[k - 1][b - 1] - (k - 1) * s[k - 1][b]
    return tuple(tuple(r) for r in s)


def simplex_points(m: int, N: int):
    """All ``a`` in ``N^m`` with ``|a| <= N``."""
    if m == 0:
        yield ()
        return
    for head in range(N + 1):
        for tail in simplex_points(m - 1, N - head):
            yield (head,) + tail


def _newton_lines(vals: dict, m: int, N: int, axis: int, fn):
    # apply ``fn`` to every lattice line parallel to ``axis``
    lines: dict = {}
    for a in vals:
        key = a[:axis] + a[axis + 1:]
        lines.setdefault(key, []).append(a)
    out = {}
    for key, pts in lines.items():
        pts.sort(key=lambda a: a[axis])
        col = fn([vals[a] for a in pts])
        for a, v in zip(pts, col):
            out[a] = v
    return out


def _divided_differences(col):
    # nodes 0, 1, ..., len(col) - 1
    d = list(col)
    for k in range(1, len(d)):
        for i in range(len(d) - 1, k - 1, -1):
            d[i] = (d[i] - d[i - 1]) / k
    return d


def _stirling_transform(col):
    L = len(col) - 1
    s = _stirling1(L) if L >= 0 else ()
    out = []
    for b in range(L + 1):
        acc = col[b] * s[b][b]
        for k in range(b + 1, L + 1):
            if s[k][b]:
                acc = acc + col[k] * s[k][b]
        out.append(acc)
    return out


def _interpolate_exact(vals: dict, m: int, N: int) -> dict:
    for axis in range(m):
        vals = _newton_lines(vals, m, N, axis, _divided_differences)
    for axis in range(m):
        vals = _newton_lines(vals, m, N, axis, _stirling_transform)
    return vals


def _interpolate_torus(evaluator, m: int, N: int, batched: bool, chunk: int = 20000):
    # samples on the (N+1)-th roots of unity grid; the DFT recovers every
    # coefficient of a polynomial of partial degree <= N without aliasing
    K = N + 1
    total = K ** m
    grid = np.exp(2j * np.pi * np.arange(K) / K)
    idx = np.indices((K,) * m).reshape(m, -1).T
    values = np.empty(total, dtype=complex)
    for lo in range(0, total, chunk):
        block = idx[lo:lo + chunk]
        pts = np.concatenate([grid[block], np.ones((len(block), 1))], axis=1)
        if batched:
            values[lo:lo + chunk] = np.asarray(evaluator(pts), dtype=complex)
        else:
            values[lo:lo + chunk] = [complex(evaluator(tuple(p))) for p in pts]
    coef = np.fft.fftn(values.reshape((K,) * m)) / total
    # forward DFT of samples at grid**k returns K**m times the coefficients
    return coef


def interpolate_homogeneous(evaluator, nvars: int, degree: int, check: bool = True,
                            rtol: float = 1e-6, exact: bool | None = None,
                            batched: bool = False) -> MultiPoly:
    """Recover a homogeneous polynomial of known degree from point values.

    The polynomial is dehomogenized at ``x_last = 1``.

    Exact mode samples the integer lattice ``{a : |a| <= degree}``, takes
    Newton divided differences one variable at a time and converts the
    falling-factorial basis to monomials with Stirling numbers. Float mode
    samples the grid of ``(degree+1)``-th roots of unity and inverts it by
    FFT, which is perfectly conditioned where integer nodes are not.

    Parameters
    ----------
    evaluator : callable
        Maps a point (tuple of length ``nvars``) to a scalar. With
        ``batched`` it maps a ``(K, nvars)`` array to ``K`` values.
    exact : bool, optional
        Force the mode; by default exact iff the evaluator returns
        :class:`ExactComplex` at the origin chart point.
    check : bool
        Compare the result with the evaluator off the sampling grid
        (float mode also bounds the coefficients beyond total degree).

    Raises
    ------
    InterpolationError
        If the samples are not those of a homogeneous form of this degree.
    """
    N = degree
    m = nvars - 1
    if nvars < 1 or N < 0:
        raise ValueError("need nvars >= 1 and degree >= 0")
    if exact is None:
        if batched:
            exact = False
        else:
            exact = isinstance(evaluator((0,) * m + (1,)), ExactComplex)

    if m == 0:
        v = evaluator(np.ones((1, 1)))[0] if batched else evaluator((1,))
        return MultiPoly(1, {(N,): v if exact else complex(v)})

    if exact:
        pts = list(simplex_points(m, N))
        vals = {a: to_exact(evaluator(tuple(a) + (1,))) for a in pts}
        coef = _interpolate_exact(vals, m, N)
        terms = {a + (N - sum(a),): c for a, c in coef.items() if c}
        p = MultiPoly(nvars, terms)
    else:
        if (N + 1) ** m > 50_000_000:
            raise ValueError(f"interpolation grid {N + 1}^{m} too large")
        coef = _interpolate_torus(evaluator, m, N, batched)
        deg = np.indices(coef.shape).sum(axis=0)
        scale = float(np.max(np.abs(coef))) if coef.size else 0.0
        if check and scale > 0:
            spill = float(np.max(np.abs(coef[deg > N]), initial=0.0))
            if spill > rtol * scale:
                raise InterpolationError(
                    f"coefficients beyond degree {N} reach {spill:.3e} "
                    f"(scale {scale:.3e}); samples are not a degree-{N} form"
                )
        terms = {}
        for a in zip(*np.nonzero(deg <= N)):
            c = complex(coef[a])
            if c:
                a = tuple(int(k) for k in a)
                terms[a + (N - sum(a),)] = c
        p = MultiPoly(nvars, terms)
        batched_eval = evaluator if batched else None
        if check:
            _check_interpolant(p, evaluator, nvars, exact, rtol, batched_eval)
        return p

    if check:
        _check_interpolant(p, evaluator, nvars, exact, rtol, None)
    return p


def _check_interpolant(p, evaluator, nvars, exact, rtol, batched_eval):
    probes = [
        [Fraction(2 * i + 1, 3 + i) for i in range(nvars - 1)] + [Fraction(1)],
        [Fraction(-(i + 2), 5) for i in range(nvars - 1)] + [Fraction(3, 2)],
    ]
    for pt in probes:
        if exact:
            pt_e = [ExactComplex(x) for x in pt]
            got, want = poly_eval(p, pt_e), evaluator(tuple(pt_e))
            if got != want:
                raise InterpolationError(f"exact interpolant disagrees at {pt}: {got} != {want}")
        else:
            ptf = [float(x) for x in pt]
            got = poly_eval(p, ptf)
            if batched_eval is not None:
                want = complex(batched_eval(np.array([ptf], dtype=complex))[0])
            else:
                want = complex(evaluator(tuple(ptf)))
            scale = sum(abs(c) * np.prod([abs(x) ** k for x, k in zip(ptf, e)])
                        for e, c in p.terms.items())
            if abs(got - want) > rtol * max(scale, abs(want), 1e-300):
                raise InterpolationError(
                    f"interpolant residual {abs(got - want):.3e} exceeds {rtol:.1e} x scale "
                    f"{scale:.3e} at {ptf}; samples are not a degree-{p.degree} form"
                )


# ---------------------------------------------------------------------------
# univariate


class UniPoly:
    """Dense univariate polynomial, coefficients low degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = list(coeffs)
        while c and _is_zero(c[-1]):
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def from_roots(cls, roots, exact: bool = False) -> "UniPoly":
        one = ExactComplex(1) if exact else 1.0 + 0j
        p = cls([one])
        for r in roots:
            p = p * cls([-r, one])
        return p

    @property
    def exact(self) -> bool:
        return all(_exact_coef(c) for c in self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self):
        return self.coeffs[-1]

    def _one(self):
        return ExactComplex(1) if self.exact else 1.0 + 0j

    def _zero(self):
        return ExactComplex(0) if self.exact else 0j

    def to_float(self) -> "UniPoly":
        return UniPoly([complex(c) for c in self.coeffs])

    def __add__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [None] * (n - len(self.coeffs))
        b = list(other.coeffs) + [None] * (n - len(other.coeffs))
        out = []
        for x, y in zip(a, b):
            out.append(y if x is None else x if y is None else x + y)
        return UniPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            return UniPoly([c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return UniPoly([])
        out = [None] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                v = a * b
                out[i + j] = v if out[i + j] is None else out[i + j] + v
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = UniPoly([self._one()])
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UniPoly({[str(c) for c in self.coeffs]})"

    def __call__(self, z):
        acc = self._zero() if self.exact and isinstance(z, ExactComplex) else 0j
        if self.exact and isinstance(z, ExactComplex):
            for c in reversed(self.coeffs):
                acc = acc * z + c
            return acc
        for c in reversed(self.coeffs):
            acc = acc * complex(z) + complex(c)
        return acc

    def eval_matrix(self, M: np.ndarray) -> np.ndarray:
        """Horner evaluation on a square matrix (never via diagonalization)."""
        N = M.shape[0]
        exact = is_exact(M) and self.exact
        if not exact:
            M = as_float(M)
            acc = np.zeros((N, N), dtype=complex)
            I = np.eye(N, dtype=complex)
            for c in reversed(self.coeffs):
                acc = acc @ M + complex(c) * I
            return acc
        I = eye(N, exact=True)
        acc = I * ExactComplex(0)
        for c in reversed(self.coeffs):
            acc = acc.dot(M) + I * c
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly([c * k for k, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        inv = (ExactComplex(1) / self.lead) if self.exact else 1.0 / complex(self.lead)
        return UniPoly([c * inv for c in self.coeffs])

    def __divmod__(self, other: "UniPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        exact = self.exact and other.exact
        rem = list(self.coeffs)
        dq = other.degree
        q = [ExactComplex(0) if exact else 0j] * max(len(rem) - dq, 0)
        inv = (ExactComplex(1) / other.lead) if exact else 1.0 / complex(other.lead)
        for k in range(len(rem) - 1, dq - 1, -1):
            f = rem[k] * inv
            q[k - dq] = f
            if not _is_zero(f):
                for i, c in enumerate(other.coeffs):
                    rem[k - dq + i] = rem[k - dq + i] - f * c
        return UniPoly(q), UniPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def compose(self, inner: "UniPoly") -> "UniPoly":
        acc = UniPoly([])
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc


def uni_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd over Q(i); exact inputs only."""
    if not (a.exact and b.exact):
        raise TypeError("uni_gcd requires exact polynomials")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def _squarefree_exact(p: UniPoly):
    """Yun's algorithm: returns [(factor, multiplicity), ...]."""
    out = []
    dp = p.derivative()
    a = uni_gcd(p, dp)
    b = p // a
    c = dp // a
    d = c - b.derivative()
    i = 1
    while b.degree > 0:
        a = uni_gcd(b, d)
        b = b // a
        c = d // a
        d = c - b.derivative()
        if a.degree > 0:
            out.append((a, i))
        i += 1
    return out


def _float_roots(p: UniPoly, polish: bool = True) -> np.ndarray:
    c = np.array([complex(x) for x in p.coeffs], dtype=complex)
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    r = np.roots(c[::-1])
    if polish:
        dc = np.array([k * c[k] for k in range(1, len(c))])
        for _ in range(3):
            f = np.polyval(c[::-1], r)
            df = np.polyval(dc[::-1], r)
            ok = np.abs(df) > 0
            r = np.where(ok, r - np.where(ok, f / np.where(ok, df, 1), 0), r)
    return r


def uni_roots(p: UniPoly, tol: Tolerances = DEFAULT_TOL):
    """Roots with multiplicities, ``[(root, mult), ...]`` sorted by (re, im).

    Exact polynomials are split by squarefree decomposition; float
    polynomials have their roots clustered within the cluster tolerance.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no finite root set")
    out = []
    if p.exact:
        for factor, mult in _squarefree_exact(p):
            for r in _float_roots(factor):
                out.append((complex(r), mult))
    else:
        r = _float_roots(p, polish=False)
        if len(r):
            delta = tol.cluster * (1.0 + float(np.max(np.abs(r))))
            for members in cluster_values(r, delta):
                out.append((complex(np.mean(r[members])), len(members)))
    out.sort(key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9)))
    return out
