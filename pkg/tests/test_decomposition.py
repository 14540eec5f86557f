import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from jspec.continuation import PathSpec, TrackingError, branches_at, loop_path, track
from jspec.decomposition import (
    UnionFind,
    decompose,
    resample_consistency,
    trace_certificate,
)
from jspec.generators import direct_sum_instance


def _line_conic_branch_points():
    # w with A1 + w A2 (unshifted) having a double eigenvalue
    w, z = sp.symbols("w z")
    A1 = sp.diag(1, 5, 0)
    A2 = sp.Matrix([[1, 2, 1], [2, 7, 1], [1, 1, sp.Rational(1, 2)]])
    cp = (A1 + w * A2 - z * sp.eye(3)).det()
    disc = sp.discriminant(sp.Poly(sp.expand(cp), z).as_expr(), z)
    return [complex(r) for r in sp.Poly(disc, w).nroots()]


def test_loop_around_branch_point_swaps_conic_branches(load):
    t = load("line_conic")
    bp = next(b for b in _line_conic_branch_points() if abs(b.imag) > 1e-6)
    others = [b for b in _line_conic_branch_points() if abs(b - bp) > 1e-9]
    radius = 0.5 * min(abs(b - bp) for b in others)
    d = np.array([0, radius])
    c0 = np.array([1, bp]) + d
    res = track(t, loop_path(c0, d, points=96))
    perm = res.perm
    moved = [i for i, p in enumerate(perm) if p != i]
    assert len(moved) == 2  # a transposition
    # the line component contributes the branch (1 + shift)(c1 + c2), which stays put
    base = branches_at(t, c0)
    line = [i for i, (v, _) in enumerate(base) if abs(v - (1 + t.shift) * (c0[0] + c0[1])) < 1e-9]
    assert len(line) == 1 and line[0] not in moved


def test_loop_not_enclosing_branch_point_is_identity(load):
    t = load("line_conic")
    c0 = np.array([1.0, 0.0])
    d = np.array([0.0, 0.05])
    res = track(t, loop_path(c0, d))
    assert res.perm == tuple(range(len(res.perm)))


def test_open_path_tracks_continuously(load):
    t = load("line_conic")
    path = PathSpec(np.array([[1.0, 0.0], [1.0, 0.5], [0.3, 1.0]]))
    res = track(t, path)
    end = np.sort_complex(np.asarray(res.values[-1]))
    ref = np.sort_complex(np.array([v for v, _ in branches_at(t, [0.3, 1.0])]))
    assert np.allclose(end, ref)


def test_path_validation():
    with pytest.raises(ValueError):
        PathSpec(np.array([[1.0, 0.0]]))
    with pytest.raises(ValueError):
        PathSpec(np.array([[1.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        PathSpec(np.array([[1.0, 0.0], [0.0, 1.0]]), closed=True)


def test_tracking_through_branch_point_raises(load):
    t = load("line_conic")
    bp = next(b for b in _line_conic_branch_points() if abs(b.imag) > 1e-6)
    # the segment midpoint is the branch point, where two clusters merge
    path = PathSpec(np.array([[1, bp - 0.1], [1, bp + 0.1]]), h_min=1e-6)
    with pytest.raises(TrackingError) as info:
        track(t, path)
    assert info.value.segment == 0


# ---------------------------------------------------------------------------


def test_union_find_groups():
    uf = UnionFind(5)
    uf.union(0, 3)
    uf.union(3, 4)
    assert uf.groups() == [[0, 3, 4], [1], [2]]


def test_trace_certificate_accepts_full_orbit_and_rejects_half():
    w = np.cos(np.pi * (np.arange(8) + 0.5) / 8)
    # branches of z^2 = 1 + w: individually not polynomial, jointly symmetric functions are
    r = np.sqrt(1.5 + w + 0j)
    vals = np.stack([r, -r, 2 + w], axis=1)
    assert trace_certificate(w, vals, [0, 1])[0]
    assert trace_certificate(w, vals, [2])[0]
    assert not trace_certificate(w, vals, [0])[0]


@pytest.mark.parametrize(
    "name, profile",
    [
        ("line_conic", [(1, 1), (2, 1)]),
        ("reflection_pair", [(2, 2)]),
        ("reflection_triple", [(2, 1), (2, 1)]),
        ("idempotent_pair", [(1, 1), (1, 1)]),
        ("block_idempotent_pair", [(1, 2), (1, 2)]),
    ],
)
def test_fixture_decompositions(load, name, profile):
    from jspec.pencil import TransformMatrix, apply_transform, is_admissible, sample_admissible

    t = load(name)
    C = TransformMatrix.identity(t.n, exact=t.exact)
    if not is_admissible(t, C):
        C, _ = sample_admissible(t)
    d = decompose(apply_transform(t, C))
    assert d.profile() == profile
    assert d.certified
    assert sum(l * m for l, m in profile) == t.N


def test_line_conic_line_data(load):
    t = load("line_conic")
    d = decompose(t)
    line = next(c for c in d.components if c.degree == 1)
    conic = next(c for c in d.components if c.degree == 2)
    # the line x1 + x2 = x3 meets each coordinate line at eigenvalue 1 (before the shift)
    assert np.allclose([mu for row in line.eigenvalues for mu in row], [1 + t.shift] * 2)
    # A1 = diag(1, 5, 0): the conic owns the other two eigenvalues
    assert np.allclose(np.sort(np.real(conic.eigenvalues[0])), [0 + t.shift, 5 + t.shift])
    assert np.allclose(line.intersections[0], [1 / (1 + t.shift)])


def test_decompose_is_seed_deterministic(load):
    t = load("line_conic")
    a, b = decompose(t, seed=3), decompose(t, seed=3)
    assert a.profile() == b.profile()
    assert a.assignment == b.assignment
    assert np.array_equal(a.base_direction, b.base_direction)


def test_resample_consistency(load):
    t = load("line_conic")
    assert resample_consistency(t, decompose(t, seed=0), seed=5)


@settings(max_examples=8)
@given(st.integers(0, 1000))
def test_direct_sum_profiles_property(seed):
    inst = direct_sum_instance([1, 2, 3], seed=seed, repeat=1)
    d = decompose(inst.tuple, seed=seed)
    assert d.profile() == inst.factors
    assert sum(c.degree * c.multiplicity for c in d.components) == inst.tuple.N
