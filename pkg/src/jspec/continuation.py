"""Predictor-corrector continuation of eigenvalue branches of ``B(c) = sum c_j A_j``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from jspec.algebra.linalg import eigen_clusters
from jspec.config import DEFAULT_TOL, Tolerances
from jspec.pencil import MatrixTuple, direction_matrix

__all__ = ["PathSpec", "TrackResult", "TrackingError", "track", "loop_path", "branches_at"]


class TrackingError(RuntimeError):
    def __init__(self, message: str, segment: int | None = None):
        super().__init__(message)
        self.segment = segment


@dataclass
class PathSpec:
    """Piecewise-linear path through direction space.

    Attributes
    ----------
    waypoints : ndarray, shape (W, n)
    closed : bool
        First and last waypoints coincide.
    h_min : float
        Smallest accepted step, as a fraction of a segment.
    accept : float
        Corrector acceptance: matched values must lie within
        ``accept * (minimum cluster gap)`` of the prediction.
    """

    waypoints: np.ndarray
    closed: bool = False
    h_min: float = 1e-10
    accept: float = 0.3

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=complex)
        if self.waypoints.ndim != 2 or len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        steps = np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)
        if np.any(steps == 0):
            raise ValueError("consecutive waypoints must be distinct")
        if self.closed and not np.allclose(self.waypoints[0], self.waypoints[-1], rtol=0, atol=1e-14):
            raise ValueError("closed path must end where it starts")


@dataclass
class TrackResult:
    """Branch values along a path, indexed by starting label.

    ``values[w][i]`` is branch ``i`` at waypoint ``w``. For closed paths
    ``perm[i]`` is the starting label that branch ``i`` ends on.
    """

    values: list
    multiplicities: tuple
    perm: tuple | None = None
    steps: int = 0
    rejected: int = 0
    log: list = field(default_factory=list)


def branches_at(t: MatrixTuple, c, tol: Tolerances = DEFAULT_TOL):
    """Eigenvalue clusters ``[(mu, m), ...]`` of ``B(c)``.

    The spectrum meets the line through ``c`` at ``1/mu`` for ``mu != 0``.
    """
    c = np.asarray(c, dtype=complex)
    if not np.any(c):
        raise ValueError("direction must be nonzero")
    return eigen_clusters(direction_matrix(t, c), tol)


def loop_path(c0, d, points: int = 64) -> PathSpec:
    """Closed loop ``c0 + (exp(i theta) - 1) d``."""
    theta = 2 * np.pi * np.arange(points + 1) / points
    wp = np.asarray(c0)[None, :] + (np.exp(1j * theta)[:, None] - 1) * np.asarray(d)[None, :]
    wp[-1] = wp[0]
    return PathSpec(wp, closed=True)


def _min_gap(vals: np.ndarray) -> float:
    if len(vals) < 2:
        return np.inf
    diff = np.abs(vals[:, None] - vals[None, :])
    diff[np.diag_indices(len(vals))] = np.inf
    return float(diff.min())


def track(t: MatrixTuple, path: PathSpec, start=None, tol: Tolerances = DEFAULT_TOL) -> TrackResult:
    """Follow eigenvalue clusters of ``B(c)`` along ``path``.

    Each step predicts by linear extrapolation, matches the new clusters to
    the prediction by optimal assignment on ``|delta mu|`` (multiplicities
    must agree), and halves the step unless every match lies within
    ``path.accept`` times the smallest cluster gap.

    Parameters
    ----------
    start : list of (mu, m), optional
        Clusters at the first waypoint; computed if omitted.

    Raises
    ------
    TrackingError
        If the step falls below ``path.h_min`` on some segment.
    """
    wp = path.waypoints
    if start is None:
        start = branches_at(t, wp[0], tol)
    cur = np.array([v for v, _ in start], dtype=complex)
    mults = np.array([m for _, m in start])
    K = len(cur)
    values = [cur.copy()]
    vel = None
    c_cur = wp[0]
    steps = rejected = 0
    for seg in range(len(wp) - 1):
        a, b = wp[seg], wp[seg + 1]
        s, h = 0.0, 1.0
        while s < 1.0:
            h = min(h, 1.0 - s)
            if h < path.h_min:
                raise TrackingError(
                    f"step underflow on segment {seg} (s={s:.6f}) from {np.round(a, 6)} to {np.round(b, 6)}",
                    segment=seg,
                )
            c_new = a + (s + h) * (b - a)
            cl = eigen_clusters(direction_matrix(t, c_new), tol)
            new = np.array([v for v, _ in cl], dtype=complex)
            new_m = np.array([m for _, m in cl])
            if len(new) != K or sorted(new_m) != sorted(mults):
                h /= 2
                rejected += 1
                continue
            dc = float(np.linalg.norm(c_new - c_cur))
            pred = cur + vel * dc if vel is not None else cur
            cost = np.abs(pred[:, None] - new[None, :])
            cost = cost + np.where(mults[:, None] != new_m[None, :], 1e30, 0.0)
            rows, cols = linear_sum_assignment(cost)
            matched = new[cols[np.argsort(rows)]]
            err = float(np.max(np.abs(matched - pred))) if K else 0.0
            if K > 1 and err > path.accept * _min_gap(new):
                h /= 2
                rejected += 1
                continue
            vel = (matched - cur) / dc if dc > 0 else None
            cur = matched
            c_cur = c_new
            s += h
            h = min(2 * h, 1.0)
            steps += 1
        values.append(cur.copy())

    perm = None
    if path.closed:
        base = values[0]
        cost = np.abs(cur[:, None] - base[None, :])
        cost = cost + np.where(mults[:, None] != mults[None, :], 1e30, 0.0)
        rows, cols = linear_sum_assignment(cost)
        perm = tuple(int(c) for c in cols[np.argsort(rows)])
        miss = float(np.max(np.abs(cur - base[list(perm)]))) if K else 0.0
        if K > 1 and miss > path.accept * _min_gap(base):
            raise TrackingError(f"closed path does not return to the base fibre (miss {miss:.3e})")
    return TrackResult(values, tuple(int(m) for m in mults), perm, steps, rejected)
