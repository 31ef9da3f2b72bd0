"""Constrained pose extraction from an unconstrained 3x6 estimate.

The estimate is first rescaled so its left 3x3 block has unit determinant.
The scaled right block has the structure of an essential matrix (rotation
times skew), so it is factored through its SVD into two candidate
(rotation, skew) pairs; the candidate placing more lines in front of the
camera wins.  The translation is read off the skew factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousPose,
    DegenerateTranslation,
    EmptyLineSet,
    SingularRotationBlock,
)
from .geometry import CameraPose, LineProjectionMatrix, euler_from_rotation, unskew

__all__ = [
    "PoseCandidate",
    "DecompositionResult",
    "recover_scale",
    "decompose_essential_like",
    "disambiguate",
    "extract_pose",
    "euler_from_rotation",
]

# Factors of the essential-like decomposition.
_Z = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
_W = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class PoseCandidate:
    """One factorization rotation @ skew of the scaled right block.

    ``skew`` is the right factor, i.e. an estimate of [-t]_x, so the camera
    position is the negated skew vector (read after projecting numerical
    noise back onto the skew subspace).
    """

    rotation: np.ndarray
    skew: np.ndarray

    @property
    def translation(self):
        symmetrized = 0.5 * (self.skew - self.skew.T)
        return -unskew(symmetrized)


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """Both candidate factorizations plus the SVD bookkeeping.

    ``sigma`` is the average of the two largest singular values (the
    translation magnitude for an exactly constrained input).  When it
    vanishes relative to the input the translation direction is undefined;
    ``degenerate_translation`` flags that and both candidates carry a zero
    skew.
    """

    candidate_a: PoseCandidate
    candidate_b: PoseCandidate
    sigma: float
    singular_values: np.ndarray
    degenerate_translation: bool


def recover_scale(estimate):
    """Scale factor making the left 3x3 block's determinant exactly 1.

    The homogeneous solver returns the estimate at arbitrary scale and
    sign; s = 1 / cbrt(det(left block)) fixes both at once (a negative
    determinant yields a negative s).

    Raises SingularRotationBlock when the determinant is (near) zero.
    """
    p = np.asarray(estimate, dtype=float)
    det = np.linalg.det(p[:, :3])
    if abs(det) < 1e-14:
        raise SingularRotationBlock(
            f"left 3x3 block is singular (det = {det:.3e})"
        )
    return float(1.0 / np.cbrt(det))


def decompose_essential_like(scaled_right):
    """Factor a 3x3 matrix into the two (rotation, skew) candidate pairs.

    With SVD U S V^T of the input, the candidates are

        R_a = U W  diag(1, 1, +-1) V^T,   skew_a = sigma V Z   V^T
        R_b = U W^T diag(1, 1, +-1) V^T,  skew_b = sigma V Z^T V^T

    where sigma is the mean of the first two singular values and the +-1
    entry is the sign making each rotation's determinant +1.  Both
    candidates reconstruct the same rank-2 approximation of the input.
    """
    m = np.asarray(scaled_right, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {m.shape}")
    u, singular, vt = np.linalg.svd(m)
    v = vt.T
    sigma = float(0.5 * (singular[0] + singular[1]))
    # det(W) = det(W^T) = 1, so one sign correction serves both candidates.
    sign = float(np.sign(np.linalg.det(u) * np.linalg.det(vt)))
    flip = np.diag([1.0, 1.0, sign])
    candidate_a = PoseCandidate(
        rotation=u @ _W @ flip @ vt,
        skew=sigma * (v @ _Z @ vt),
    )
    candidate_b = PoseCandidate(
        rotation=u @ _W.T @ flip @ vt,
        skew=sigma * (v @ _Z.T @ vt),
    )
    degenerate = sigma <= 1e-14 * np.linalg.norm(m)
    return DecompositionResult(
        candidate_a=candidate_a,
        candidate_b=candidate_b,
        sigma=sigma,
        singular_values=singular,
        degenerate_translation=bool(degenerate),
    )


def _line_reference_points(lines):
    """Origin-closest points of the finite lines, as an (m, 3) array."""
    finite = [ln for ln in lines if ln.direction.any()]
    if not finite:
        return np.empty((0, 3))
    moments = np.array([ln.moment for ln in finite])
    dirs = np.array([ln.direction for ln in finite])
    return np.cross(dirs, moments) / np.einsum("ij,ij->i", dirs, dirs)[:, None]


def _front_votes(candidate, points):
    """How many reference points lie in front of the candidate pose."""
    if points.size == 0:
        return 0
    z = (candidate.rotation @ (points - candidate.translation).T)[2]
    return int(np.sum(z < 0.0))


def disambiguate(result, scale, lines):
    """Pick the candidate that places strictly more 3D lines in front.

    Each line is represented by its point closest to the world origin; the
    vote counts how many of those map to negative camera z.  ``scale`` is
    the factor already applied to the decomposed block and does not enter
    the vote.

    Raises EmptyLineSet without lines and AmbiguousPose on a tied vote.
    """
    del scale  # candidates are complete; kept for pipeline symmetry
    if len(lines) == 0:
        raise EmptyLineSet("need at least one line to disambiguate the pose")
    points = _line_reference_points(lines)
    votes_a = _front_votes(result.candidate_a, points)
    votes_b = _front_votes(result.candidate_b, points)
    if votes_a == votes_b:
        raise AmbiguousPose(
            f"in-front vote tied at {votes_a} : {votes_b} over {len(lines)} lines"
        )
    chosen = result.candidate_a if votes_a > votes_b else result.candidate_b
    return CameraPose(chosen.rotation, chosen.translation)


def extract_pose(estimate, lines):
    """Full extraction: scale recovery, decomposition, disambiguation.

    ``estimate`` is a 3x6 array (or LineProjectionMatrix) from the linear
    solver; ``lines`` are the world-frame 3D lines used for the in-front
    vote.  Returns (pose, decomposition, scale).  The result is invariant
    to the homogeneous sign of the estimate.

    Raises DegenerateTranslation when the scaled right block vanishes
    (zero translation: the decomposition cannot orient the camera).
    """
    if isinstance(estimate, LineProjectionMatrix):
        estimate = estimate.matrix
    p = np.asarray(estimate, dtype=float)
    if p.shape != (3, 6):
        raise ValueError(f"expected a 3x6 estimate, got {p.shape}")
    scale = recover_scale(p)
    result = decompose_essential_like(scale * p[:, 3:])
    if result.degenerate_translation:
        raise DegenerateTranslation(
            "translation is indistinguishable from zero; "
            "candidate poses share the camera center"
        )
    pose = disambiguate(result, scale, lines)
    return pose, result, scale
