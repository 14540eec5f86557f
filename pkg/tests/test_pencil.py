from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from jspec.algebra import ExactComplex, MultiPoly, as_float, det
from jspec.pencil import (
    TransformMatrix,
    TupleError,
    apply_transform,
    direction_matrix,
    evaluate_pencil,
    generic_profile,
    hyperplane_power,
    is_admissible,
    make_tuple,
    sample_admissible,
    spectrum_polynomial,
)

from conftest import exact_matrices, random_complex, random_hermitian

LINE_CONIC = [[[1, 0, 0], [0, 5, 0], [0, 0, 0]], [[1, 2, 1], [2, 7, 1], [1, 1, "1/2"]]]

# det(x1 A1 + x2 A2 - x3 I) for the pair above, from a sympy cofactor expansion
LINE_CONIC_DET = {
    (2, 1, 0): Fraction(5, 2),
    (2, 0, 1): Fraction(-5),
    (1, 1, 1): Fraction(-15),
    (1, 0, 2): Fraction(6),
    (0, 3, 0): Fraction(-5, 2),
    (0, 2, 1): Fraction(-5),
    (0, 1, 2): Fraction(17, 2),
    (0, 0, 3): Fraction(-1),
}


def _sympy_det(mats):
    n = len(mats)
    xs = sp.symbols(f"x1:{n + 2}")
    N = len(mats[0])
    M = sum((xs[j] * sp.Matrix([[sp.Rational(str(v)) for v in row] for row in mats[j]]) for j in range(n)),
            sp.zeros(N, N)) - xs[n] * sp.eye(N)
    return sp.Poly(sp.expand(M.det(method="berkowitz")), *xs)


def test_line_conic_spectrum_matches_frozen_oracle():
    t = make_tuple(LINE_CONIC, preprocess=False)
    assert t.exact and t.selfadjoint
    p = spectrum_polynomial(t).poly
    assert {e: c.re for e, c in p.terms.items()} == LINE_CONIC_DET
    assert all(c.im == 0 for c in p.terms.values())


def test_frozen_oracle_agrees_with_sympy():
    poly = _sympy_det(LINE_CONIC)
    assert {m: Fraction(str(c)) for m, c in poly.terms()} == LINE_CONIC_DET


def test_line_conic_spectrum_factors_as_line_times_conic():
    x1, x2, x3 = sp.symbols("x1:4")
    expr = sum(sp.Rational(c.numerator, c.denominator) * x1 ** e[0] * x2 ** e[1] * x3 ** e[2]
               for e, c in LINE_CONIC_DET.items())
    factors = sp.factor_list(expr)[1]
    degrees = sorted(sp.Poly(f, x1, x2, x3).total_degree() for f, _ in factors)
    assert degrees == [1, 2]
    line = next(f for f, _ in factors if sp.Poly(f, x1, x2, x3).total_degree() == 1)
    assert sp.simplify(line / (x1 + x2 - x3)) in (1, -1)


@pytest.mark.parametrize("N, n", [(2, 2), (3, 2), (3, 3), (4, 2)])
def test_float_spectrum_matches_exact(N, n):
    rng = np.random.default_rng(N * 7 + n)
    mats = [[[str(Fraction(int(v), 3)) for v in row] for row in rng.integers(-4, 5, size=(N, N))] for _ in range(n)]
    te = make_tuple(mats, preprocess=False)
    pe = spectrum_polynomial(te).poly
    pf = spectrum_polynomial(te.as_float()).poly
    assert pf.allclose(pe.to_float(), rtol=1e-10)


@given(st.integers(0, 10_000))
def test_spectrum_normalization_and_homogeneity(seed):
    rng = np.random.default_rng(seed)
    N, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
    t = make_tuple([random_complex(rng, N) for _ in range(n)], preprocess=False)
    p = spectrum_polynomial(t).poly
    assert p.is_homogeneous and p.degree == N
    assert abs(p.coefficient((0,) * n + (N,)) - (-1) ** N) < 1e-9
    x = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    val = np.linalg.det(evaluate_pencil(t, x))
    assert abs(p(tuple(x)) - val) <= 1e-8 * max(1.0, abs(val), p.max_abs_coef() * np.linalg.norm(x) ** N)


@given(exact_matrices(2), exact_matrices(2), exact_matrices(2))
def test_reordering_matrices_permutes_variables(A, B, C):
    t = make_tuple([A, B, C], preprocess=False)
    s = make_tuple([C, A, B], preprocess=False)
    p, q = spectrum_polynomial(t).poly, spectrum_polynomial(s).poly
    # q(x1, x2, x3, x4) = p(x2, x3, x1, x4)
    assert q == p.permute([1, 2, 0, 3])


@given(exact_matrices(2), exact_matrices(2))
def test_transform_composes_spectrum(A, B):
    t = make_tuple([A, B], preprocess=False)
    C = TransformMatrix.of(np.array([[ExactComplex(1), ExactComplex(Fraction(1, 2))],
                                     [ExactComplex(-1), ExactComplex(2)]], dtype=object))
    That = apply_transform(t, C)
    p = spectrum_polynomial(t).poly
    q = spectrum_polynomial(That).poly
    assert q == p.compose_linear(C.extended())


# ---------------------------------------------------------------------------
# make_tuple and the invertibility shift


def test_shift_is_smallest_integer():
    t = make_tuple([[[1, 0], [0, 0]], [[0, 0], [0, -1]]])
    # A1 + I fails for A2 (eigenvalue -1), A1 + 2I and A2 + 2I are invertible
    assert t.shift == 2
    for M in t.matrices:
        assert det(M)


def test_shift_bounded_by_spectral_radius():
    rng = np.random.default_rng(3)
    for _ in range(20):
        N = 4
        Ms = [np.diag(rng.integers(-3, 4, size=N)).astype(complex) for _ in range(2)]
        t = make_tuple(Ms)
        rho = max(np.max(np.abs(np.diag(M))) for M in Ms)
        assert t.shift <= int(np.floor(rho)) + 1
        assert all(abs(np.linalg.det(M)) > 1e-12 for M in t.float_matrices())


def test_invertible_tuple_is_not_shifted():
    t = make_tuple([[[2, 1], [0, 3]], [[1, 0], [0, 1]]])
    assert t.shift == 0
    assert t.unshifted() is t


def test_unshifted_restores_input():
    t = make_tuple([[[1, 1], [0, 0]], [[0, 0], [1, 1]]])
    assert t.shift == 1
    assert t.unshifted().matrices[0].tolist() == make_tuple(
        [[[1, 1], [0, 0]], [[0, 0], [1, 1]]], preprocess=False).matrices[0].tolist()


@pytest.mark.parametrize(
    "mats, fragment",
    [
        ([], "at least one"),
        ([[[1, 2, 3], [4, 5, 6]]], "not square"),
        ([[[1, 0], [0, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]], "size"),
        ([[[np.inf, 0], [0, 1]]], "non-finite"),
    ],
)
def test_make_tuple_rejects_bad_input(mats, fragment):
    with pytest.raises(TupleError, match=fragment):
        make_tuple(mats)


def test_selfadjoint_flag():
    rng = np.random.default_rng(0)
    assert make_tuple([random_hermitian(rng, 3) for _ in range(2)]).selfadjoint
    assert not make_tuple([random_complex(rng, 3) for _ in range(2)]).selfadjoint


def test_direction_matrix_is_linear_combination():
    t = make_tuple(LINE_CONIC, preprocess=False)
    M = direction_matrix(t, [2, -1])
    ref = 2 * as_float(t.matrices[0]) - as_float(t.matrices[1])
    assert np.allclose(as_float(M), ref)


def test_hyperplane_power_shape():
    h = hyperplane_power(2, 3, 2)
    x1, x2, x3 = (MultiPoly.variable(3, i) for i in range(3))
    assert h == (x1 + x2 - x3) ** 2 * x3
    assert h.degree == 3


# ---------------------------------------------------------------------------
# transforms and admissibility


def test_identity_transform_is_noop():
    t = make_tuple(LINE_CONIC)
    That = apply_transform(t, TransformMatrix.identity(2))
    assert all(a.tolist() == b.tolist() for a, b in zip(t.matrices, That.matrices))


def test_swap_transform_swaps_pair():
    t = make_tuple([[[1, 1], [0, 0]], [[0, 0], [1, 1]]])
    swap = TransformMatrix.of(np.array([[ExactComplex(0), ExactComplex(1)],
                                        [ExactComplex(1), ExactComplex(0)]], dtype=object))
    s = apply_transform(t, swap)
    assert s.matrices[0].tolist() == t.matrices[1].tolist()


def test_singular_transform_rejected():
    t = make_tuple(LINE_CONIC)
    with pytest.raises(TupleError, match="singular"):
        apply_transform(t, TransformMatrix.of(np.ones((2, 2))))


def test_complex_transform_breaks_selfadjointness():
    t = make_tuple(LINE_CONIC)
    C = TransformMatrix.of(np.array([[1, 1j], [0, 1]]))
    assert not apply_transform(t, C).selfadjoint
    assert not is_admissible(t, C)


def test_shared_eigenvalues_not_admissible_but_nearby_is(load):
    # A1 = diag(1, -1, 1, -1) meets both conics at the same points
    t = load("reflection_triple")
    res = is_admissible(t, TransformMatrix.identity(3, exact=False))
    assert not res and any("profile" in d for d in res.diagnostics)
    C, tries = sample_admissible(t, seed=0, radius=0.1)
    assert is_admissible(t, C)
    assert C.real and tries <= 5
    assert np.max(np.abs(as_float(C.C) - np.eye(3))) <= 0.1 + 1e-3


def test_admissible_transform_keeps_exactness():
    t = make_tuple(LINE_CONIC)
    C, _ = sample_admissible(t, seed=1)
    assert apply_transform(t, C).exact
    for x in C.C.ravel():
        assert (x.re * 1024).denominator == 1


def test_generic_profile_sees_repeated_component():
    I2 = np.eye(2)
    A = np.kron(I2, np.array([[1.0, 0], [0, -1]]))
    B = np.kron(I2, np.array([[-0.5, 0.8], [0.8, 0.5]]))
    t = make_tuple([A, B])
    assert generic_profile(t) == (2, 2)


def test_repeated_eigenvalue_of_generic_profile_is_admissible():
    # a single matrix with a double eigenvalue: the double root is generic
    t = make_tuple([np.diag([1.0, 1.0, 2.0])])
    assert generic_profile(t) == (1, 2)
    assert is_admissible(t, TransformMatrix.identity(1, exact=False))


def test_sample_admissible_radius_zero(load):
    t = load("line_conic")
    C, tries = sample_admissible(t, radius=0)
    assert C.is_identity() and tries == 1
    with pytest.raises(RuntimeError, match="identity is not admissible"):
        sample_admissible(load("reflection_triple"), radius=0)
