"""Homogeneous linear system for the 3x6 line projection matrix.

Each correspondence between a world line L and its image line l yields the
constraint [l]_x P L = 0.  Expanded over the row-major vectorization p of
P this gives three 18-coefficient rows of rank 2, of which the two with
the largest norm are kept.  Stacking n correspondences produces the
2n x 18 measurement matrix whose least-squares nullspace direction is the
estimate of p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import prenorm
from .errors import InsufficientLines, RankDeficient
from .geometry import ImageLine2D, PluckerLine, skew_matrix

MIN_LINES = 9

# Nullspace uniqueness heuristic: sigma_17 below this fraction of sigma_1
# signals a degenerate configuration.
RANK_DEFICIENCY_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Correspondence:
    """A world 3D line, its observed 2D line, and a binary solver weight."""

    line3d: PluckerLine
    line2d: ImageLine2D
    weight: int = 1

    def __post_init__(self):
        if self.weight not in (0, 1):
            raise ValueError("weight must be 0 or 1")


@dataclass(frozen=True, eq=False)
class MeasurementSystem:
    """Stacked constraint rows for a correspondence set.

    ``matrix`` holds the two consecutive rows of every weight-1
    correspondence (shape 2k x 18 for k active).  ``rows_all`` holds the
    rows of every correspondence regardless of weight, so residuals can be
    evaluated for rejected correspondences too.  ``active`` is the
    per-correspondence weight mask.
    """

    matrix: np.ndarray
    rows_all: np.ndarray
    active: np.ndarray

    @property
    def n_active(self):
        return int(self.active.sum())


def _constraint_rows(units2d, vectors3d):
    """Two kept constraint rows per correspondence, shape (n, 2, 18).

    The three candidate rows for (l, L) have per-P-row coefficient blocks
    equal to the entries of [l]_x times L^T; the two largest-norm rows are
    kept (the cross-product matrix has rank 2), preserving their order.
    """
    n = units2d.shape[0]
    lx, ly, lw = units2d[:, 0], units2d[:, 1], units2d[:, 2]
    zero = np.zeros(n)
    cross = np.empty((n, 3, 3))
    cross[:, 0, 0], cross[:, 0, 1], cross[:, 0, 2] = zero, -lw, ly
    cross[:, 1, 0], cross[:, 1, 1], cross[:, 1, 2] = lw, zero, -lx
    cross[:, 2, 0], cross[:, 2, 1], cross[:, 2, 2] = -ly, lx, zero
    rows = (cross[:, :, :, None] * vectors3d[:, None, None, :]).reshape(n, 3, 18)
    norms = np.linalg.norm(rows, axis=2)
    order = np.argsort(-norms, axis=1, kind="stable")[:, :2]
    order.sort(axis=1)
    return np.take_along_axis(rows, order[:, :, None], axis=1)


def build_measurement_matrix(correspondences, weights=None):
    """Assemble the measurement system for a correspondence set.

    Every 2D line is scaled to unit norm before its rows are built, so each
    correspondence contributes with equal influence regardless of its
    homogeneous scale.  ``weights``, when given, overrides the weights
    stored on the correspondences.

    Raises InsufficientLines when fewer than 9 correspondences are active.
    """
    n = len(correspondences)
    if weights is None:
        weights = np.array([c.weight for c in correspondences])
    else:
        weights = np.asarray(weights)
        if weights.shape != (n,):
            raise ValueError("weights must match the number of correspondences")
    active = weights == 1
    if active.sum() < MIN_LINES:
        raise InsufficientLines(
            f"need at least {MIN_LINES} active correspondences, "
            f"got {int(active.sum())}"
        )
    coeffs = np.array([c.line2d.coeffs for c in correspondences])
    units = coeffs / np.linalg.norm(coeffs, axis=1, keepdims=True)
    vectors = np.array([c.line3d.vector for c in correspondences])
    rows = _constraint_rows(units, vectors)
    return MeasurementSystem(
        matrix=rows[active].reshape(-1, 18),
        rows_all=rows.reshape(-1, 18),
        active=active,
    )


def solve_homogeneous_lsq(matrix):
    """Least-squares nullspace direction of a (>=18) x 18 matrix.

    Returns the unit 18-vector along the right singular vector of the
    smallest singular value, the residual vector, and the conditioning
    ratio sigma_17 / sigma_18 (large means a well-determined nullspace).

    Raises RankDeficient when sigma_17 < 1e-10 * sigma_1, i.e. the solution
    direction is not unique up to scale.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[1] != 18 or m.shape[0] < 18:
        raise ValueError(f"expected an (>=18) x 18 matrix, got {m.shape}")
    _, singular, vt = np.linalg.svd(m, full_matrices=False)
    if singular[16] < RANK_DEFICIENCY_RTOL * singular[0]:
        raise RankDeficient(
            "measurement matrix nullspace is not one-dimensional "
            f"(sigma_17 / sigma_1 = {singular[16] / singular[0]:.3e})"
        )
    solution = vt[-1]
    residuals = m @ solution
    conditioning = singular[16] / singular[17] if singular[17] > 0 else np.inf
    return solution, residuals, float(conditioning)


def correspondence_residuals(system, solution):
    """Per-correspondence residual against a candidate solution vector.

    Evaluated for every correspondence, including weight-0 ones, as the
    Euclidean norm of its two constraint-row residuals.
    """
    r = system.rows_all @ np.asarray(solution, dtype=float)
    return np.sqrt(r[0::2] ** 2 + r[1::2] ** 2)


@dataclass(frozen=True, eq=False)
class DltDiagnostics:
    """Solve metadata: active count, nullspace conditioning, residual RMS."""

    n_active: int
    conditioning: float
    residual_rms: float
    prenormalized: bool


def estimate_projection_matrix(correspondences, prenormalize=True, weights=None):
    """Estimate the 3x6 line projection matrix from correspondences.

    With ``prenormalize`` on (the default), 2D lines are similarity-
    normalized through duality, 3D lines are translated so the Weiszfeld
    closest point becomes the origin, the conditioned system is solved, and
    the estimate is mapped back to the original coordinates.  With it off
    the raw system is solved directly (the outlier-rejection loop uses that
    path).

    Returns the 3x6 estimate (scale arbitrary) and solve diagnostics.
    """
    n = len(correspondences)
    if weights is None:
        weights = np.array([c.weight for c in correspondences])
    else:
        weights = np.asarray(weights)
    active = [c for c, w in zip(correspondences, weights) if w == 1]
    if len(active) < MIN_LINES:
        raise InsufficientLines(
            f"need at least {MIN_LINES} active correspondences, got {len(active)}"
        )
    if prenormalize:
        coeffs = np.array([c.line2d.coeffs for c in active])
        units = coeffs / np.linalg.norm(coeffs, axis=1, keepdims=True)
        units, n2d_matrix, n2d_inverse = prenorm._normalize_units(units)
        units /= np.linalg.norm(units, axis=1, keepdims=True)
        moments = np.array([c.line3d.moment for c in active])
        dirs = np.array([c.line3d.direction for c in active])
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("cannot prenormalize lines at infinity")
        anchors = np.cross(dirs, moments) / (norms**2)[:, None]
        # Conditioning needs the closest point only to sub-mm accuracy;
        # best-effort keeps nonsmooth-minimizer scenes (common for small n)
        # from failing and bounds the iteration cost.
        center = prenorm._weiszfeld(
            dirs / norms[:, None], anchors, tol=1e-4, max_iter=500, strict=False
        )
        moments = moments - np.cross(center, dirs)
        rows = _constraint_rows(units, np.hstack([moments, dirs]))
        solution, residuals, conditioning = solve_homogeneous_lsq(
            rows.reshape(-1, 18)
        )
        translation = np.eye(6)
        translation[:3, 3:] = skew_matrix(-center)
        estimate = n2d_inverse @ solution.reshape(3, 6) @ translation
    else:
        system = build_measurement_matrix(correspondences, weights=weights)
        solution, residuals, conditioning = solve_homogeneous_lsq(system.matrix)
        estimate = solution.reshape(3, 6)
    diagnostics = DltDiagnostics(
        n_active=len(active),
        conditioning=conditioning,
        residual_rms=float(np.sqrt(np.mean(residuals**2))),
        prenormalized=bool(prenormalize),
    )
    return estimate, diagnostics
