from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jspec.algebra import (
    ExactComplex,
    MultiPoly,
    UniPoly,
    as_exact,
    as_float,
    charpoly_exact,
    det,
    eigen_clusters,
    eigen_decompose,
    interpolate_homogeneous,
    uni_gcd,
    uni_roots,
)
from jspec.algebra.poly import InterpolationError, simplex_points

from conftest import exact_matrices, exact_scalars, small_fractions


# ---------------------------------------------------------------------------
# scalars


@pytest.mark.parametrize(
    "text, re, im",
    [
        ("3", 3, 0),
        ("-1/2", Fraction(-1, 2), 0),
        ("1/2+3/4 i", Fraction(1, 2), Fraction(3, 4)),
        ("1/2+3/4i", Fraction(1, 2), Fraction(3, 4)),
        ("-2i", 0, -2),
        ("i", 0, 1),
        ("2 - i", 2, -1),
    ],
)
def test_parse_rational_strings(text, re, im):
    z = ExactComplex.parse(text)
    assert z.re == re and z.im == im


@pytest.mark.parametrize("bad", ["", "abc", "1/0", "1//2", "2i3", "1.5", "i i"])
def test_parse_rejects_invalid(bad):
    with pytest.raises(ValueError):
        ExactComplex.parse(bad)


@given(exact_scalars)
def test_str_parse_roundtrip(z):
    assert ExactComplex.parse(str(z)) == z


@given(exact_scalars, exact_scalars, exact_scalars)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if b:
        assert (a / b) * b == a
    assert (a - a) == ExactComplex(0)


@given(exact_scalars, exact_scalars)
def test_exact_arithmetic_matches_complex(a, b):
    assert abs(complex(a * b) - complex(a) * complex(b)) < 1e-12
    assert abs(complex(a + b) - (complex(a) + complex(b))) < 1e-12


# ---------------------------------------------------------------------------
# linear algebra


@given(exact_matrices(3))
def test_exact_det_matches_float(M):
    assert abs(complex(det(M)) - np.linalg.det(as_float(M))) < 1e-9 * (1 + np.linalg.norm(as_float(M)) ** 3)


@given(exact_matrices(3))
def test_cayley_hamilton_exact(M):
    cp = charpoly_exact(M)
    assert UniPoly(cp).eval_matrix(M).tolist() == (M * ExactComplex(0)).tolist()


@given(exact_matrices(4))
def test_charpoly_constant_term_is_signed_det(M):
    cp = charpoly_exact(M)
    assert cp[0] == det(M) * (-1) ** 4
    assert cp[-1] == ExactComplex(1)


def test_eigen_clusters_merge_repeated_values():
    M = np.diag([1.0, 1.0, 2.0, 3.0 + 1e-12])
    cl = eigen_clusters(M)
    assert [(round(v.real, 9), m) for v, m in cl] == [(1.0, 2), (2.0, 1), (3.0, 1)]


def test_eigen_decompose_handles_defective_block():
    J = np.array([[2.0, 1.0, 0], [0, 2.0, 0], [0, 0, 5.0]])
    cl = eigen_decompose(J)
    assert [c.multiplicity for c in cl] == [2, 1]
    B = cl[0].basis
    assert B.shape == (3, 2)
    assert np.linalg.norm(B[2]) < 1e-12


# ---------------------------------------------------------------------------
# multivariate polynomials


def _random_form(rng, nvars, degree, exact):
    terms = {}
    for e in product(range(degree + 1), repeat=nvars):
        if sum(e) == degree and rng.random() < 0.7:
            a, b = rng.integers(-5, 6, size=2)
            terms[e] = ExactComplex(Fraction(int(a), 3), int(b)) if exact else complex(a / 3, b)
    return MultiPoly(nvars, terms)


@pytest.mark.parametrize("nvars, degree", [(2, 3), (3, 2), (3, 4), (4, 3)])
def test_exact_interpolation_recovers_form(nvars, degree):
    rng = np.random.default_rng(nvars * 10 + degree)
    p = _random_form(rng, nvars, degree, exact=True)
    q = interpolate_homogeneous(lambda x: p(x), nvars, degree, exact=True)
    assert q == p


@pytest.mark.parametrize("nvars, degree", [(2, 5), (3, 4), (4, 6)])
def test_float_interpolation_recovers_form(nvars, degree):
    rng = np.random.default_rng(nvars * 10 + degree)
    p = _random_form(rng, nvars, degree, exact=False)
    q = interpolate_homogeneous(lambda x: p(x), nvars, degree, exact=False)
    assert q.allclose(p, rtol=1e-11)


def test_interpolation_rejects_wrong_degree():
    p = MultiPoly(3, {(3, 0, 0): 1.0 + 0j, (0, 0, 3): 1.0 + 0j})
    with pytest.raises(InterpolationError):
        interpolate_homogeneous(lambda x: p(x), 3, 2, exact=False)
    pe = MultiPoly(3, {(3, 0, 0): ExactComplex(1), (0, 0, 3): ExactComplex(1)})
    with pytest.raises(InterpolationError):
        interpolate_homogeneous(lambda x: pe(x), 3, 2, exact=True)


def test_simplex_points_count():
    from math import comb

    assert len(list(simplex_points(3, 4))) == comb(3 + 4, 3)


@given(st.lists(small_fractions, min_size=3, max_size=3), st.lists(small_fractions, min_size=3, max_size=3))
def test_multipoly_product_evaluates_pointwise(a, b):
    la = MultiPoly.linear_form([ExactComplex(x) for x in a])
    lb = MultiPoly.linear_form([ExactComplex(x) for x in b])
    pt = (ExactComplex(2), ExactComplex(-1, 1), ExactComplex(Fraction(1, 3)))
    assert (la * lb)(pt) == la(pt) * lb(pt)
    assert (la ** 2 - lb)(pt) == la(pt) * la(pt) - lb(pt)


def test_permute_and_swap():
    x = [MultiPoly.variable(3, i) for i in range(3)]
    p = x[0] ** 2 * x[1] + x[2]
    q = p.swap(0, 2)
    assert q == x[2] ** 2 * x[1] + x[0]
    assert q.swap(0, 2) == p


def test_compose_linear_matches_substitution():
    rng = np.random.default_rng(5)
    p = _random_form(rng, 3, 3, exact=True)
    M = np.array([[ExactComplex(int(v)) for v in row] for row in rng.integers(-3, 4, size=(3, 3))], dtype=object)
    q = p.compose_linear(M)
    x = np.array([ExactComplex(1), ExactComplex(2, -1), ExactComplex(Fraction(-1, 2))], dtype=object)
    assert q(tuple(x)) == p(tuple(x.dot(M)))


# ---------------------------------------------------------------------------
# univariate polynomials


@given(st.lists(exact_scalars, min_size=1, max_size=5), st.lists(exact_scalars, min_size=2, max_size=4))
def test_divmod_identity(a, b):
    A, B = UniPoly(a), UniPoly(b)
    if B.is_zero():
        return
    q, r = divmod(A, B)
    assert q * B + r == A
    assert r.degree < B.degree


def test_gcd_of_products():
    one = ExactComplex(1)
    f = UniPoly.from_roots([ExactComplex(1), ExactComplex(2)], exact=True)
    g = UniPoly.from_roots([ExactComplex(2), ExactComplex(0, 1)], exact=True)
    h = UniPoly.from_roots([ExactComplex(2)], exact=True)
    assert uni_gcd(f, g) == h
    assert uni_gcd(f * f, f).lead == one


def test_uni_roots_multiplicities_exact_and_float():
    p = UniPoly.from_roots([ExactComplex(1)] * 3 + [ExactComplex(-2)], exact=True)
    roots = uni_roots(p)
    assert [(round(r.real, 10), m) for r, m in roots] == [(-2.0, 1), (1.0, 3)]
    pf = UniPoly.from_roots([1.0, 1.0, 3.0])
    assert [m for _, m in uni_roots(pf)] == [2, 1]


def test_eval_matrix_is_horner_not_diagonalization():
    J = as_exact([[1, 1], [0, 1]])
    p = UniPoly([ExactComplex(0), ExactComplex(0), ExactComplex(1)])  # z^2
    assert p.eval_matrix(J).tolist() == as_exact([[1, 2], [0, 1]]).tolist()
