"""Shared helpers: random poses, synthetic scenes, proportionality asserts."""

from __future__ import annotations

import numpy as np
import pytest

import pnl


def random_rotation(rng):
    """Uniform-ish random rotation from a QR factorization."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def random_pose(rng, t_min=0.5, t_max=20.0):
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return pnl.CameraPose(
        random_rotation(rng), direction * rng.uniform(t_min, t_max)
    )


def axis_angle_rotation(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = pnl.skew_matrix(axis)
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def observing_pose(rng, t_min=0.5, t_max=20.0, max_off_axis=np.radians(40.0)):
    """Random pose that keeps the region around the world origin in front.

    The position is uniform in direction and magnitude; the orientation is
    an origin-facing attitude with random roll, tilted away from the origin
    by up to ``max_off_axis``.  Poses whose optical axis turns away from
    the origin make the two decomposition candidates indistinguishable to
    the in-front vote, so round-trip checks use observing poses.
    """
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    pivot = np.zeros(3)
    pivot[np.argmin(np.abs(direction))] = 1.0
    e1 = np.cross(pivot, direction)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(direction, e1)
    roll = rng.uniform(0.0, 2.0 * np.pi)
    look_at = np.vstack([
        np.cos(roll) * e1 + np.sin(roll) * e2,
        -np.sin(roll) * e1 + np.cos(roll) * e2,
        direction,
    ])
    tilt = axis_angle_rotation(rng.normal(size=3), rng.uniform(0, max_off_axis))
    return pnl.CameraPose(tilt @ look_at, direction * rng.uniform(t_min, t_max))


def random_front_segment(rng, pose, depth=(2.0, 20.0), spread=0.5):
    """World endpoints of a segment strictly in front of the camera."""
    endpoints = []
    for _ in range(2):
        z = -rng.uniform(*depth)
        x = rng.uniform(-spread, spread) * abs(z)
        y = rng.uniform(-spread, spread) * abs(z)
        endpoints.append(pose.rotation.T @ np.array([x, y, z]) + pose.position)
    return endpoints[0], endpoints[1]


def front_line_set(rng, pose, count=6):
    """Lines whose origin-closest points discriminate the candidate poses.

    Each line passes through a point close to the world origin (relative to
    the camera distance) with a direction orthogonal to that point, so the
    point is exactly the line's closest point to the world origin.  For an
    observing pose those points are in front of the true camera and behind
    its mirror twin, making the in-front vote decisive.
    """
    axis_cosine = float(
        pose.rotation[2] @ (pose.position / np.linalg.norm(pose.position))
    )
    assert axis_cosine > 0.05, "pose does not observe the origin region"
    radius = 0.2 * axis_cosine * np.linalg.norm(pose.position)
    lines = []
    for _ in range(count):
        world = rng.normal(size=3)
        world *= rng.uniform(0.1, 1.0) * radius / np.linalg.norm(world)
        helper = rng.normal(size=3)
        direction = np.cross(world, helper)
        while np.linalg.norm(direction) < 1e-9:
            helper = rng.normal(size=3)
            direction = np.cross(world, helper)
        lines.append(pnl.plucker_from_endpoints(world, world + direction))
    return lines


def scene_correspondences(seed, n, sigma_p=0.0, outlier_fraction=0.0,
                          outlier_sigma=100.0, trial=0):
    """Standard synthetic scene -> (correspondences, true pose, outlier mask)."""
    config = pnl.BenchConfig(
        n_lines=n, sigma_p=sigma_p, outlier_fraction=outlier_fraction,
        outlier_sigma=outlier_sigma, trials=1, seed=seed,
    )
    rng = np.random.default_rng([seed, trial])
    segments, pose, intrinsics = pnl.generate_scene(config, rng)
    pixels = pnl.project_points_to_pixels(
        pose, segments.reshape(-1, 3), intrinsics
    ).reshape(n, 2, 2)
    pixels = pnl.add_endpoint_noise(pixels, sigma_p, rng)
    pixels, mask = pnl.apply_outliers(pixels, outlier_fraction, outlier_sigma, rng)
    correspondences = pnl.correspondences_from_pixels(segments, pixels, intrinsics)
    return correspondences, pose, mask


def assert_proportional(actual, expected, rtol=1e-9):
    """Assert two vectors/matrices agree up to a nonzero scale (sign included)."""
    a = np.asarray(actual, dtype=float).ravel()
    b = np.asarray(expected, dtype=float).ravel()
    assert a.shape == b.shape
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    assert na > 0 and nb > 0, "zero vector cannot be proportional"
    a = a / na
    b = b / nb
    if a @ b < 0:
        b = -b
    assert np.linalg.norm(a - b) <= rtol, (
        f"not proportional: unit-vector gap {np.linalg.norm(a - b):.3e}"
    )


def direction_angle(a, b):
    """Angle in radians between two directions, ignoring sign."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    cross = np.linalg.norm(np.cross(a, b))
    dot = abs(float(a @ b))
    return float(np.arctan2(cross, dot))


@pytest.fixture
def rng():
    return np.random.default_rng(20240911)
