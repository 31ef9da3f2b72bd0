"""Algebraic outlier rejection: iteratively reweighted homogeneous solves.

Correspondences whose algebraic residual exceeds a decreasing-quantile
threshold get zero weight and drop out of the next solve; weights are
recomputed from scratch every iteration, so a correspondence can re-enter.
The loop runs on unnormalized data (prenormalization would mask outliers)
and stops once the error score stops decreasing; only then are the
surviving inliers prenormalized and solved for the final pose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dlt, solver
from .errors import ConvergenceFailed, TooFewInliers
from .geometry import CameraPose


@dataclass(frozen=True)
class AorConfig:
    """Rejection-loop parameters.

    The quantile starts at 0.9 and drops by 0.1 per iteration down to 0.3,
    after which it stays at ``floor_quantile``.  The error score is the
    mean squared residual over the active correspondences; the loop stops
    on the first iteration whose relative score decrease falls below
    ``convergence_delta``.
    """

    quantile_schedule: tuple = (0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3)
    floor_quantile: float = 0.25
    max_iterations: int = 50
    min_inliers: int = 9
    convergence_delta: float = 1e-12

    def __post_init__(self):
        quantiles = (*self.quantile_schedule, self.floor_quantile)
        if any(not 0.0 < q <= 1.0 for q in quantiles):
            raise ValueError("quantiles must lie in (0, 1]")
        if self.min_inliers < dlt.MIN_LINES:
            raise ValueError(f"min_inliers must be at least {dlt.MIN_LINES}")


@dataclass(frozen=True, eq=False)
class AorResult:
    """Outcome of the rejection loop plus the final inlier-only solution."""

    pose: CameraPose
    inlier_mask: np.ndarray
    iterations: int
    final_error: float
    score_history: np.ndarray = field(repr=False)
    solution: solver.PoseSolution = field(repr=False)


def quantile_threshold(residuals, iteration, config):
    """Nearest-rank quantile of the residuals for a given loop iteration.

    Iteration k (1-based) uses the k-th schedule entry, or the floor
    quantile once the schedule is exhausted.  The nearest-rank value is the
    ceil(j * n)-th smallest residual.
    """
    residuals = np.asarray(residuals, dtype=float)
    n = residuals.size
    if n == 0:
        raise ValueError("residuals must be nonempty")
    if iteration < 1:
        raise ValueError("iteration is 1-based")
    schedule = config.quantile_schedule
    j = schedule[iteration - 1] if iteration <= len(schedule) else config.floor_quantile
    # round() guards ceil against float artifacts such as 0.9 * 500 -> 450.000...006
    rank = min(max(math.ceil(round(j * n, 9)), 1), n)
    return float(np.sort(residuals)[rank - 1])


def estimate_pose_aor(correspondences, config=None):
    """Estimate the pose while rejecting mismatched correspondences.

    Each iteration solves the unnormalized system over the weight-1 set,
    evaluates residuals for every correspondence against the new solution,
    and zero-weights those above the quantile threshold.  The score history
    is strictly decreasing until the stop fires; the weights of the
    best-scoring (previous) iteration feed the final prenormalized solve
    and pose extraction.

    Raises TooFewInliers when the active set falls below
    ``config.min_inliers`` and ConvergenceFailed when ``max_iterations``
    pass without the score stabilizing.
    """
    if config is None:
        config = AorConfig()
    n = len(correspondences)
    weights = np.array([c.weight for c in correspondences])
    if int(weights.sum()) < config.min_inliers:
        raise TooFewInliers(
            f"need at least {config.min_inliers} active correspondences, "
            f"got {int(weights.sum())}"
        )

    # Constraint rows do not depend on the weights: build them once and
    # slice the active pairs each iteration.
    base = dlt.build_measurement_matrix(correspondences, weights=np.ones(n, dtype=int))

    scores = []
    previous_weights = weights
    stopped = False
    iterations = 0
    for iteration in range(1, config.max_iterations + 1):
        iterations = iteration
        active = weights == 1
        system = dlt.MeasurementSystem(
            matrix=base.rows_all.reshape(n, 2, 18)[active].reshape(-1, 18),
            rows_all=base.rows_all,
            active=active,
        )
        solution, _, _ = dlt.solve_homogeneous_lsq(system.matrix)
        residuals = dlt.correspondence_residuals(system, solution)
        score = float(np.mean(residuals[weights == 1] ** 2))
        scores.append(score)
        if len(scores) >= 2:
            previous = scores[-2]
            decrease = (previous - score) / previous if previous > 0 else 0.0
            if decrease < config.convergence_delta:
                stopped = True
                break
        previous_weights = weights
        threshold = quantile_threshold(residuals, iteration, config)
        weights = (residuals <= threshold).astype(int)
        if int(weights.sum()) < config.min_inliers:
            raise TooFewInliers(
                f"rejection left {int(weights.sum())} active correspondences "
                f"(minimum {config.min_inliers}) at iteration {iteration}"
            )
    if not stopped:
        raise ConvergenceFailed(
            f"error score still decreasing after {config.max_iterations} iterations"
        )

    final_weights = previous_weights
    inliers = [
        c for c, w in zip(correspondences, final_weights) if w == 1
    ]
    final = solver.estimate_camera_pose(inliers, prenormalize=True)
    return AorResult(
        pose=final.pose,
        inlier_mask=final_weights.astype(bool),
        iterations=iterations,
        final_error=scores[-2] if len(scores) >= 2 else scores[-1],
        score_history=np.array(scores),
        solution=final,
    )
