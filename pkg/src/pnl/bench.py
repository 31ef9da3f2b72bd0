"""Synthetic Monte Carlo benchmark: scene generation, noise and outlier
models, pose-error metrics, and a seeded trial runner.

Scenes follow the standard synthetic protocol: segment endpoints uniform in
an origin-centered cube, a pinhole camera placed on a sphere around the
origin looking straight at it (roll randomized), scenes accepted only when
every endpoint projects inside the image.  Every trial owns an RNG stream
forked from (seed, trial index), so serial and concurrent runs produce
identical records.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .aor import AorConfig, estimate_pose_aor
from .dlt import Correspondence
from .errors import PnlError, SceneGenerationFailed
from .geometry import CameraPose, plucker_from_endpoints
from .io import Intrinsics, line2d_from_endpoints
from .solver import estimate_camera_pose

CSV_COLUMNS = (
    "trial", "method", "n", "sigma_p", "outlier_fraction",
    "delta_theta_deg", "delta_tau_m", "runtime_ms", "failed",
)


@dataclass(frozen=True)
class BenchConfig:
    """Parameters of one synthetic experiment cell."""

    n_lines: int
    sigma_p: float = 0.0
    outlier_fraction: float = 0.0
    outlier_sigma: float = 100.0
    trials: int = 1000
    seed: int = 0
    cube_side: float = 10.0
    camera_distance: float = 25.0
    image_size: tuple = (640, 480)
    focal: float = 800.0
    aor: AorConfig = field(default_factory=AorConfig)

    def __post_init__(self):
        if self.n_lines < 9:
            raise ValueError("n_lines must be at least 9")
        if self.sigma_p < 0:
            raise ValueError("sigma_p must be nonnegative")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1)")
        if min(self.cube_side, self.camera_distance, self.focal,
               self.outlier_sigma, *self.image_size) <= 0:
            raise ValueError("geometric parameters must be positive")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @property
    def intrinsics(self):
        width, height = self.image_size
        return Intrinsics(self.focal, self.focal, width / 2.0, height / 2.0)


@dataclass(frozen=True)
class PoseError:
    """Orientation error (degrees, axis-angle) and position error (meters)."""

    delta_theta_deg: float
    delta_tau_m: float


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Outcome of a single benchmark trial."""

    trial: int
    method: str
    n: int
    sigma_p: float
    outlier_fraction: float
    error: PoseError | None
    runtime_ms: float
    failed: bool
    failure: str | None = None
    diagnostics: dict = field(default_factory=dict)


def _look_at_rotation(direction, roll):
    """Rotation whose camera z-axis is ``direction`` (roll about the axis)."""
    pivot = np.zeros(3)
    pivot[np.argmin(np.abs(direction))] = 1.0
    e1 = np.cross(pivot, direction)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(direction, e1)
    x_row = np.cos(roll) * e1 + np.sin(roll) * e2
    y_row = -np.sin(roll) * e1 + np.cos(roll) * e2
    return np.vstack([x_row, y_row, direction])


def project_points_to_pixels(pose, points, intrinsics):
    """Pixel coordinates of world points (all must lie in front)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    rays = (pose.rotation @ (pts - pose.position).T).T
    if np.any(rays[:, 2] >= 0):
        raise ValueError("cannot project points behind the camera")
    depth = -rays[:, 2]
    xn = rays[:, 0] / depth
    yn = rays[:, 1] / depth
    px = intrinsics.cx + intrinsics.fx * xn + intrinsics.skew * yn
    py = intrinsics.cy + intrinsics.fy * yn
    return np.column_stack([px, py])


def generate_scene(config, rng):
    """Random segments in the cube plus an accepting camera pose.

    Endpoints are drawn once; the camera (position on the sphere of radius
    ``camera_distance``, orientation looking at the origin with uniform
    roll) is re-drawn until every endpoint lands inside the image, up to
    100 attempts.
    """
    half = config.cube_side / 2.0
    segments = rng.uniform(-half, half, size=(config.n_lines, 2, 3))
    intrinsics = config.intrinsics
    width, height = config.image_size
    flat = segments.reshape(-1, 3)
    for _ in range(100):
        direction = rng.normal(size=3)
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            continue
        direction /= norm
        roll = rng.uniform(0.0, 2.0 * np.pi)
        pose = CameraPose(
            _look_at_rotation(direction, roll),
            config.camera_distance * direction,
        )
        rays = (pose.rotation @ (flat - pose.position).T).T
        if np.any(rays[:, 2] >= 0):
            continue
        pixels = project_points_to_pixels(pose, flat, intrinsics)
        if (pixels[:, 0] >= 0).all() and (pixels[:, 0] <= width).all() \
                and (pixels[:, 1] >= 0).all() and (pixels[:, 1] <= height).all():
            return segments, pose, intrinsics
    raise SceneGenerationFailed(
        "no camera placement kept all endpoints in view after 100 attempts"
    )


def add_endpoint_noise(endpoints, sigma_p, rng):
    """Perturb each pixel coordinate with i.i.d. Gaussian noise."""
    endpoints = np.asarray(endpoints, dtype=float)
    if sigma_p < 0:
        raise ValueError("sigma_p must be nonnegative")
    if sigma_p == 0:
        return endpoints.copy()
    return endpoints + rng.normal(0.0, sigma_p, size=endpoints.shape)


def apply_outliers(endpoints, fraction, outlier_sigma, rng):
    """Add extreme extra noise to floor(fraction * n) randomly chosen lines.

    Returns the perturbed endpoints and the true-outlier mask.
    """
    endpoints = np.asarray(endpoints, dtype=float).copy()
    n = endpoints.shape[0]
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    mask = np.zeros(n, dtype=bool)
    count = int(fraction * n)
    if count:
        chosen = rng.choice(n, size=count, replace=False)
        endpoints[chosen] += rng.normal(
            0.0, outlier_sigma, size=(count,) + endpoints.shape[1:]
        )
        mask[chosen] = True
    return endpoints, mask


def pose_errors(estimated, truth):
    """Axis-angle orientation error (degrees) and position error (meters).

    The angle is taken from atan2 of the antisymmetric part's magnitude and
    the trace; unlike plain arccos of the trace this stays accurate to
    machine precision for near-identity differences.
    """
    relative = truth.rotation.T @ estimated.rotation
    sin_theta = 0.5 * np.linalg.norm(
        [relative[2, 1] - relative[1, 2],
         relative[0, 2] - relative[2, 0],
         relative[1, 0] - relative[0, 1]]
    )
    cos_theta = 0.5 * (np.trace(relative) - 1.0)
    return PoseError(
        delta_theta_deg=float(np.degrees(np.arctan2(sin_theta, cos_theta))),
        delta_tau_m=float(np.linalg.norm(estimated.position - truth.position)),
    )


def correspondences_from_pixels(segments, pixel_endpoints, intrinsics):
    """Pair world Plücker lines with image lines from (noisy) pixel endpoints."""
    return [
        Correspondence(
            plucker_from_endpoints(seg[0], seg[1]),
            line2d_from_endpoints(px[0], px[1], intrinsics),
        )
        for seg, px in zip(segments, pixel_endpoints)
    ]


def _run_trial(config, method, index):
    rng = np.random.default_rng([config.seed, index])
    segments, pose_true, intrinsics = generate_scene(config, rng)
    pixels = project_points_to_pixels(
        pose_true, segments.reshape(-1, 3), intrinsics
    ).reshape(config.n_lines, 2, 2)
    pixels = add_endpoint_noise(pixels, config.sigma_p, rng)
    pixels, outlier_mask = apply_outliers(
        pixels, config.outlier_fraction, config.outlier_sigma, rng
    )
    diagnostics = {}
    try:
        correspondences = correspondences_from_pixels(segments, pixels, intrinsics)
    except PnlError as exc:
        return TrialRecord(
            trial=index, method=method, n=config.n_lines,
            sigma_p=config.sigma_p, outlier_fraction=config.outlier_fraction,
            error=None, runtime_ms=0.0, failed=True,
            failure=type(exc).__name__, diagnostics=diagnostics,
        )
    # Timing covers the estimation only; data preparation stays outside.
    start = time.perf_counter()
    try:
        if method == "aor":
            result = estimate_pose_aor(correspondences, config.aor)
            solution = result.solution
            pose = result.pose
            diagnostics["iterations"] = result.iterations
            diagnostics["inlier_count"] = int(result.inlier_mask.sum())
            if outlier_mask.any():
                rejected = ~result.inlier_mask
                diagnostics["outlier_recall"] = float(
                    rejected[outlier_mask].sum() / outlier_mask.sum()
                )
        elif method == "plain":
            solution = estimate_camera_pose(correspondences)
            pose = solution.pose
        else:
            raise ValueError(f"unknown method {method!r}")
        runtime_ms = (time.perf_counter() - start) * 1e3
    except PnlError as exc:
        runtime_ms = (time.perf_counter() - start) * 1e3
        return TrialRecord(
            trial=index, method=method, n=config.n_lines,
            sigma_p=config.sigma_p, outlier_fraction=config.outlier_fraction,
            error=None, runtime_ms=runtime_ms, failed=True,
            failure=type(exc).__name__, diagnostics=diagnostics,
        )
    diagnostics["conditioning"] = solution.diagnostics.conditioning
    return TrialRecord(
        trial=index, method=method, n=config.n_lines,
        sigma_p=config.sigma_p, outlier_fraction=config.outlier_fraction,
        error=pose_errors(pose, pose_true), runtime_ms=runtime_ms,
        failed=False, diagnostics=diagnostics,
    )


def default_thread_count():
    """Benchmark concurrency bound: PNL_THREADS or machine parallelism."""
    value = os.environ.get("PNL_THREADS", "").strip()
    if value:
        threads = int(value)
        if threads < 1:
            raise ValueError("PNL_THREADS must be a positive integer")
        return threads
    return os.cpu_count() or 1


def run_monte_carlo(config, method="plain", threads=None):
    """Run ``config.trials`` seeded trials and return their records.

    Per-trial failures are recorded, not raised.  Records are deterministic
    given (config, method) apart from the wall-clock runtime field; the
    thread count never changes the estimates because each trial owns an RNG
    stream forked from (seed, trial index).
    """
    if threads is None:
        threads = default_thread_count()
    indices = range(config.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda i: _run_trial(config, method, i), indices))
    else:
        records = [_run_trial(config, method, i) for i in indices]
    return records


def _box_stats(values):
    """Box-plot statistics with whiskers at 10x IQR (paper convention)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return None
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo, hi = q1 - 10.0 * iqr, q3 + 10.0 * iqr
    inside = values[(values >= lo) & (values <= hi)]
    return {
        "median": float(median),
        "q1": float(q1),
        "q3": float(q3),
        "iqr": float(iqr),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "n_outliers": int(values.size - inside.size),
    }


def summarize(records):
    """Per-cell summary of a record stream (one dict per experiment cell)."""
    cells = {}
    for record in records:
        key = (record.method, record.n, record.sigma_p, record.outlier_fraction)
        cells.setdefault(key, []).append(record)
    summary = []
    for (method, n, sigma_p, fraction), cell in sorted(cells.items()):
        good = [r for r in cell if not r.failed]
        summary.append({
            "method": method,
            "n": n,
            "sigma_p": sigma_p,
            "outlier_fraction": fraction,
            "trials": len(cell),
            "failures": len(cell) - len(good),
            "delta_theta_deg": _box_stats([r.error.delta_theta_deg for r in good]),
            "delta_tau_m": _box_stats([r.error.delta_tau_m for r in good]),
            "runtime_ms": _box_stats([r.runtime_ms for r in cell]),
        })
    return summary


def _fmt(x):
    return format(float(x), ".17g")


def write_records_csv(records, fh):
    """Write trial records with the fixed CSV column set."""
    fh.write(",".join(CSV_COLUMNS) + "\n")
    for r in records:
        theta = r.error.delta_theta_deg if r.error is not None else float("nan")
        tau = r.error.delta_tau_m if r.error is not None else float("nan")
        fh.write(",".join([
            str(r.trial), r.method, str(r.n), _fmt(r.sigma_p),
            _fmt(r.outlier_fraction), _fmt(theta), _fmt(tau),
            _fmt(r.runtime_ms), "1" if r.failed else "0",
        ]) + "\n")
