"""Data conditioning for the homogeneous line solver.

2D lines are conditioned through point-line duality: their 3-vectors are
treated as homogeneous 2D points and brought to zero centroid and mean
distance sqrt(2) by a similarity transform.  3D lines are conditioned by
translating the frame origin to the point minimizing the summed distance
to all lines (Weiszfeld iteration).  Both transforms are returned so the
projection matrix estimated on conditioned data can be mapped back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailed, DegenerateNormalization
from .geometry import ImageLine2D, PluckerLine, orthogonalized_moment, skew_matrix

# Unit-normed lines whose third component is below this are treated as dual
# points at infinity: still transformed, excluded from centroid/scale stats.
DUAL_POINT_INFINITY_TOL = 1e-8

# Weiszfeld term guard: lines the iterate (numerically) lies on are skipped.
WEISZFELD_DISTANCE_GUARD = 1e-12


@dataclass(frozen=True, eq=False)
class Normalization2D:
    """Similarity transform applied to 2D line 3-vectors and its inverse."""

    matrix: np.ndarray
    inverse: np.ndarray


@dataclass(frozen=True, eq=False)
class Normalization3D:
    """Plücker translation taking the frame origin to ``point``.

    ``matrix`` is the 6x6 block transform [[I, -[c]_x], [0, I]] acting on
    (moment, direction) vectors; ``inverse`` swaps the sign of the skew.
    """

    point: np.ndarray
    matrix: np.ndarray
    inverse: np.ndarray


def _normalize_units(units):
    """Array core of 2D normalization: unit-normed (n, 3) lines in and out."""
    finite = np.abs(units[:, 2]) >= DUAL_POINT_INFINITY_TOL
    if not finite.any():
        raise DegenerateNormalization("all dual points lie at infinity")
    duals = units[finite, :2] / units[finite, 2:3]
    centroid = duals.mean(axis=0)
    mean_dist = float(np.linalg.norm(duals - centroid, axis=1).mean())
    if mean_dist < 1e-12:
        raise DegenerateNormalization("all dual points coincide; scale undefined")
    s = np.sqrt(2.0) / mean_dist
    matrix = np.array([[s, 0.0, -s * centroid[0]],
                       [0.0, s, -s * centroid[1]],
                       [0.0, 0.0, 1.0]])
    inverse = np.array([[1.0 / s, 0.0, centroid[0]],
                        [0.0, 1.0 / s, centroid[1]],
                        [0.0, 0.0, 1.0]])
    return units @ matrix.T, matrix, inverse


def normalize_2d_lines(lines):
    """Similarity-normalize 2D lines via their dual homogeneous points.

    Each line 3-vector is unit-normed, read as a homogeneous 2D point, and
    the point set is translated/scaled so its centroid is at the origin and
    its mean distance from the origin is sqrt(2).  Near-infinite dual points
    are excluded from the statistics but still transformed.

    Returns the transformed lines and the Normalization2D applied.
    """
    if len(lines) < 2:
        raise ValueError("need at least 2 lines to normalize")
    units = np.array([ln.coeffs / np.linalg.norm(ln.coeffs) for ln in lines])
    transformed, matrix, inverse = _normalize_units(units)
    return ([ImageLine2D(row) for row in transformed],
            Normalization2D(matrix, inverse))


def closest_point_to_lines(lines, tol=1e-9, max_iter=100, strict=True,
                           callback=None):
    """Point minimizing the summed Euclidean distance to a set of 3D lines.

    Weiszfeld iteration: with projector Q_i = I - v_i v_i^T (unit direction
    v_i), anchor a_i the point of line i closest to the origin, and current
    distances d_i = |Q_i (x - a_i)|, the update solves

        x  <-  pinv(sum_i Q_i / d_i) (sum_i Q_i a_i / d_i).

    Terms with d_i below a small guard are skipped (the iterate lies on the
    line); the pseudo-inverse keeps the step defined when all lines share a
    direction.  The start point is the closed-form least-squares point
    (all weights equal), and iteration stops once the step is below ``tol``.

    When the minimizer sits on one of the lines the objective is nonsmooth
    there and convergence degrades to a slow linear rate, so the iteration
    budget can run out on legitimate input.  With ``strict`` (the default)
    that raises ConvergenceFailed; with ``strict=False`` the best iterate
    found is returned instead, which is what data conditioning needs.

    ``callback``, when given, receives each new iterate (scipy-style hook).
    """
    if len(lines) < 2:
        raise ValueError("need at least 2 lines")
    dirs = np.array([ln.direction for ln in lines])
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("lines at infinity have no closest point")
    vhat = dirs / norms[:, None]
    anchors = np.cross(dirs, [ln.moment for ln in lines]) / (norms**2)[:, None]
    return _weiszfeld(vhat, anchors, tol, max_iter, strict, callback)


def _weiszfeld(vhat, anchors, tol, max_iter, strict, callback=None):
    """Array core of the closest-point iteration (unit directions, anchors)."""
    eye = np.eye(3)

    def solve_weighted(weights, v, qa):
        s = np.sum(weights) * eye - (weights[:, None] * v).T @ v
        b = weights @ qa
        try:
            solution = np.linalg.solve(s, b)
            if np.all(np.isfinite(solution)):
                return solution
        except np.linalg.LinAlgError:
            pass
        return np.linalg.pinv(s) @ b  # parallel lines: minimum-norm point

    # Anchors are perpendicular to their directions, so Q_i a_i = a_i; the
    # projection is kept explicit to absorb rounding in the inputs.
    qa_all = anchors - vhat * np.einsum("ij,ij->i", vhat, anchors)[:, None]
    x = solve_weighted(np.ones(len(vhat)), vhat, qa_all)
    if callback is not None:
        callback(x)
    best_x, best_objective = x, np.inf
    for _ in range(max_iter):
        offsets = x - anchors
        perp = offsets - vhat * np.einsum("ij,ij->i", vhat, offsets)[:, None]
        dists = np.sqrt(np.einsum("ij,ij->i", perp, perp))
        objective = float(dists.sum())
        if objective < best_objective:
            best_x, best_objective = x, objective
        active = dists >= WEISZFELD_DISTANCE_GUARD
        if not active.any():
            return x  # on every line: zero distance, nothing to improve
        x_new = solve_weighted(
            1.0 / dists[active], vhat[active], qa_all[active]
        )
        step = np.linalg.norm(x_new - x)
        x = x_new
        if callback is not None:
            callback(x)
        if step < tol:
            return x
    if strict:
        raise ConvergenceFailed(
            f"Weiszfeld iteration did not reach a step below {tol:g} "
            f"in {max_iter} iterations"
        )
    return best_x


def translate_lines(lines, point):
    """Express each line in the frame whose origin sits at ``point``.

    The direction is unchanged and the moment becomes u - c x v, i.e. the
    6x6 transform [[I, -[c]_x], [0, I]] applied to (moment, direction).
    Returns the translated lines and the Normalization3D applied.
    """
    c = np.asarray(point, dtype=float)
    neg_skew = skew_matrix(-c)
    matrix = np.eye(6)
    matrix[:3, 3:] = neg_skew
    inverse = np.eye(6)
    inverse[:3, 3:] = -neg_skew
    translated = [
        PluckerLine(
            orthogonalized_moment(ln.moment - np.cross(c, ln.direction), ln.direction),
            ln.direction,
        )
        for ln in lines
    ]
    return translated, Normalization3D(c, matrix, inverse)


def denormalize_projection(projection_normalized, norm2d, norm3d):
    """Map a 3x6 estimate from conditioned coordinates back to the originals.

    With lines conditioned as l' = N l and L' = D L, an estimate P' fitting
    l' ~ P' L' corresponds to P = N^-1 P' D on the raw data.
    """
    p = np.asarray(projection_normalized, dtype=float)
    if p.shape != (3, 6):
        raise ValueError(f"expected a 3x6 matrix, got {p.shape}")
    return norm2d.inverse @ p @ norm3d.matrix
