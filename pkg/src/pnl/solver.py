"""End-to-end pose estimation: linear solve plus constrained extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dlt import DltDiagnostics, estimate_projection_matrix
from .geometry import CameraPose
from .pose import DecompositionResult, extract_pose


@dataclass(frozen=True, eq=False)
class PoseSolution:
    """Estimated pose with the intermediate quantities that produced it."""

    pose: CameraPose
    projection: np.ndarray
    scale: float
    decomposition: DecompositionResult
    diagnostics: DltDiagnostics
    chosen_candidate: str


def estimate_camera_pose(correspondences, prenormalize=True):
    """Estimate the camera pose from weight-1 line correspondences.

    Runs the linear projection-matrix estimate (prenormalized by default)
    followed by scale recovery, essential-like decomposition, and in-front
    disambiguation.  Returns a PoseSolution.
    """
    estimate, diagnostics = estimate_projection_matrix(
        correspondences, prenormalize=prenormalize
    )
    lines = [c.line3d for c in correspondences if c.weight == 1]
    pose, decomposition, scale = extract_pose(estimate, lines)
    chosen = (
        "A"
        if np.allclose(pose.rotation, decomposition.candidate_a.rotation)
        else "B"
    )
    return PoseSolution(
        pose=pose,
        projection=estimate,
        scale=scale,
        decomposition=decomposition,
        diagnostics=diagnostics,
        chosen_candidate=chosen,
    )
