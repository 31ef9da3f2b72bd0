"""Line construction, rigid transforms, projection, and Euler conversions."""

import numpy as np
import pytest

import pnl
from pnl.errors import CoincidentPoints, LineThroughCameraCenter

from conftest import (
    assert_proportional,
    direction_angle,
    random_pose,
    random_front_segment,
)


class TestPluckerFromEndpoints:
    def test_line_through_origin_has_zero_moment(self):
        line = pnl.plucker_from_endpoints([0, 0, 0], [1, 0, 0])
        np.testing.assert_array_equal(line.moment, [0, 0, 0])
        np.testing.assert_array_equal(line.direction, [1, 0, 0])

    def test_hand_computed_example(self):
        line = pnl.plucker_from_endpoints([0, 1, 0], [1, 1, 0])
        np.testing.assert_allclose(line.moment, [0, 0, -1], atol=1e-15)
        np.testing.assert_allclose(line.direction, [1, 0, 0], atol=1e-15)

    def test_swap_negates_same_projective_line(self, rng):
        for _ in range(50):
            a, b = rng.normal(size=(2, 3)) * 5
            fwd = pnl.plucker_from_endpoints(a, b)
            rev = pnl.plucker_from_endpoints(b, a)
            np.testing.assert_allclose(rev.vector, -fwd.vector, atol=1e-12)

    def test_homogeneous_inputs(self):
        # (2, 2, 0, 2) is the Euclidean point (1, 1, 0)
        line = pnl.plucker_from_endpoints([2, 2, 0, 2], [1, 1, 1, 1])
        expected = pnl.plucker_from_endpoints([1, 1, 0], [1, 1, 1])
        assert_proportional(line.vector, expected.vector, rtol=1e-12)

    def test_coincident_points_rejected(self):
        with pytest.raises(CoincidentPoints):
            pnl.plucker_from_endpoints([1, 2, 3], [1, 2, 3])

    def test_coincident_up_to_scale_rejected(self):
        with pytest.raises(CoincidentPoints):
            pnl.plucker_from_endpoints([1, 2, 3, 1], [2, 4, 6, 2])


class TestTypeInvariants:
    def test_plucker_rejects_constraint_violation(self):
        with pytest.raises(ValueError, match="bilinear"):
            pnl.PluckerLine([1, 0, 0], [1, 0, 0])

    def test_plucker_rejects_double_zero(self):
        with pytest.raises(ValueError):
            pnl.PluckerLine([0, 0, 0], [0, 0, 0])

    def test_plucker_allows_zero_moment(self):
        line = pnl.PluckerLine([0, 0, 0], [1, 2, 3])
        assert line.direction[2] == 3

    def test_plucker_is_immutable(self):
        line = pnl.PluckerLine([0, 0, 1], [1, 0, 0])
        with pytest.raises((ValueError, AttributeError)):
            line.moment[0] = 5.0

    def test_image_line_rejects_zero(self):
        with pytest.raises(ValueError):
            pnl.ImageLine2D([0, 0, 0])

    def test_camera_pose_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            pnl.CameraPose(np.eye(3) * 1.001, np.zeros(3))

    def test_camera_pose_rejects_reflection(self):
        with pytest.raises(ValueError):
            pnl.CameraPose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))

    def test_homogeneous_point_appends_unit_weight(self):
        np.testing.assert_array_equal(
            pnl.homogeneous_point([1, 2, 3]), [1, 2, 3, 1]
        )

    def test_homogeneous_point_rejects_zero(self):
        with pytest.raises(ValueError):
            pnl.homogeneous_point([0, 0, 0, 0])

    def test_motion_matrix_rejects_nonzero_lower_left(self):
        bad = np.eye(6)
        bad[4, 1] = 1e-3
        with pytest.raises(ValueError):
            pnl.LineMotionMatrix(bad)


class TestLineMotionMatrix:
    def test_identity_pose(self):
        pose = pnl.CameraPose(np.eye(3), np.zeros(3))
        np.testing.assert_array_equal(pnl.line_motion_matrix(pose).matrix, np.eye(6))

    def test_pure_translation_block(self):
        pose = pnl.CameraPose(np.eye(3), [1.0, 0.0, 0.0])
        expected = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
        np.testing.assert_array_equal(
            pnl.line_motion_matrix(pose).matrix[:3, 3:], expected
        )

    def test_endpoint_transform_oracle(self, rng):
        # T L must be the line through the transformed endpoints.
        for _ in range(1000):
            pose = random_pose(rng)
            a, b = rng.normal(size=(2, 3)) * 5
            line = pnl.plucker_from_endpoints(a, b)
            moved = pnl.transform_line(pnl.line_motion_matrix(pose), line)
            a_c = pose.rotation @ (a - pose.position)
            b_c = pose.rotation @ (b - pose.position)
            expected = pnl.plucker_from_endpoints(a_c, b_c)
            assert_proportional(moved.vector, expected.vector, rtol=1e-9)


class TestLineProjectionMatrix:
    def test_identity_pose(self):
        pose = pnl.CameraPose(np.eye(3), np.zeros(3))
        np.testing.assert_array_equal(
            pnl.line_projection_matrix(pose).matrix,
            np.hstack([np.eye(3), np.zeros((3, 3))]),
        )

    def test_pure_translation(self):
        pose = pnl.CameraPose(np.eye(3), [1.0, 0.0, 0.0])
        expected = np.hstack([
            np.eye(3),
            np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]),
        ])
        np.testing.assert_array_equal(pnl.line_projection_matrix(pose).matrix, expected)

    def test_is_top_block_of_motion_matrix(self, rng):
        for _ in range(100):
            pose = random_pose(rng)
            np.testing.assert_array_equal(
                pnl.line_projection_matrix(pose).matrix,
                pnl.line_motion_matrix(pose).matrix[:3],
            )


class TestTransformLine:
    def test_identity(self):
        line = pnl.plucker_from_endpoints([0, 1, 0], [1, 1, 0])
        motion = pnl.line_motion_matrix(pnl.CameraPose(np.eye(3), np.zeros(3)))
        out = pnl.transform_line(motion, line)
        np.testing.assert_allclose(out.vector, line.vector, atol=1e-15)

    def test_translation_moves_line_through_new_origin(self):
        # Line through (0,1,0) along x; camera at (0,1,0) sees it through
        # its origin, so the transformed moment vanishes.
        line = pnl.plucker_from_endpoints([0, 1, 0], [1, 1, 0])
        motion = pnl.line_motion_matrix(pnl.CameraPose(np.eye(3), [0.0, 1.0, 0.0]))
        out = pnl.transform_line(motion, line)
        np.testing.assert_allclose(out.moment, np.zeros(3), atol=1e-15)
        np.testing.assert_allclose(out.direction, [1, 0, 0], atol=1e-15)

    def test_constraint_preserved(self, rng):
        for _ in range(1000):
            pose = random_pose(rng)
            a, b = rng.normal(size=(2, 3)) * 5
            line = pnl.plucker_from_endpoints(a, b)
            out = pnl.transform_line(pnl.line_motion_matrix(pose), line)
            nm = np.linalg.norm(out.moment) * np.linalg.norm(out.direction)
            assert abs(out.moment @ out.direction) <= 1e-10 * max(nm, 1e-300)


class TestProjectLine:
    def test_axis_segment_example(self):
        # Segment from (0,0,-5) to (1,0,-5) seen by the canonical camera:
        # its image is the line y = 0.
        proj = pnl.line_projection_matrix(pnl.CameraPose(np.eye(3), np.zeros(3)))
        line = pnl.plucker_from_endpoints([0, 0, -5], [1, 0, -5])
        out = pnl.project_line(proj, line)
        assert_proportional(out.coeffs, [0, 1, 0], rtol=1e-12)

    def test_homogeneous_scale_invariance(self, rng):
        pose = random_pose(rng)
        proj = pnl.line_projection_matrix(pose)
        a, b = random_front_segment(rng, pose)
        line = pnl.plucker_from_endpoints(a, b)
        doubled = pnl.PluckerLine(2 * line.moment, 2 * line.direction)
        assert_proportional(
            pnl.project_line(proj, doubled).coeffs,
            pnl.project_line(proj, line).coeffs,
            rtol=1e-12,
        )

    def test_line_through_camera_center_rejected(self):
        proj = pnl.line_projection_matrix(pnl.CameraPose(np.eye(3), np.zeros(3)))
        line = pnl.plucker_from_endpoints([0, 0, 0], [1, 0, 0])  # zero moment
        with pytest.raises(LineThroughCameraCenter):
            pnl.project_line(proj, line)


class TestProjectionConventions:
    def test_image_line_parallel_to_ray_cross_product(self, rng):
        # Projected line must be parallel to the cross product of the
        # camera-frame rays of the endpoints: pins the sign convention.
        for _ in range(1000):
            pose = random_pose(rng)
            a, b = random_front_segment(rng, pose)
            line = pnl.plucker_from_endpoints(a, b)
            image = pnl.project_line(pnl.line_projection_matrix(pose), line)
            cross = np.cross(pnl.camera_ray(pose, a), pnl.camera_ray(pose, b))
            assert direction_angle(image.coeffs, cross) < 1e-9

    def test_points_on_line_are_incident_with_image(self, rng):
        for _ in range(200):
            pose = random_pose(rng)
            a, b = random_front_segment(rng, pose)
            line = pnl.plucker_from_endpoints(a, b)
            image = pnl.project_line(pnl.line_projection_matrix(pose), line)
            for t in (0.0, 0.25, 0.5, 0.75, 1.0):
                point = (1 - t) * np.asarray(a) + t * np.asarray(b)
                ray = pnl.camera_ray(pose, point)
                bound = 1e-9 * np.linalg.norm(image.coeffs) * np.linalg.norm(ray)
                assert abs(image.coeffs @ ray) <= bound

    def test_projection_equals_moment_of_transformed_line(self, rng):
        for _ in range(200):
            pose = random_pose(rng)
            a, b = rng.normal(size=(2, 3)) * 5
            line = pnl.plucker_from_endpoints(a, b)
            moved = pnl.transform_line(pnl.line_motion_matrix(pose), line)
            if np.linalg.norm(moved.moment) < 1e-9:
                continue
            image = pnl.project_line(pnl.line_projection_matrix(pose), line)
            assert_proportional(image.coeffs, moved.moment, rtol=1e-9)

    def test_point_in_front_follows_camera_z_sign(self, rng):
        pose = random_pose(rng)
        a, _ = random_front_segment(rng, pose)
        assert pnl.point_in_front(pose, a)
        behind = pose.rotation.T @ np.array([0.0, 0.0, 3.0]) + pose.position
        assert not pnl.point_in_front(pose, behind)


class TestEulerAngles:
    def test_identity(self):
        assert pnl.euler_from_rotation(np.eye(3)) == (0.0, 0.0, 0.0)

    def test_quarter_turn_about_z(self):
        rotation = pnl.rotation_from_euler(0.0, 0.0, np.pi / 2)
        alpha, beta, gamma = pnl.euler_from_rotation(rotation)
        np.testing.assert_allclose([alpha, beta, gamma], [0.0, 0.0, np.pi / 2],
                                   atol=1e-15)

    def test_round_trip_away_from_gimbal_lock(self, rng):
        for _ in range(1000):
            alpha, gamma = rng.uniform(-np.pi, np.pi, size=2)
            beta = rng.uniform(-np.radians(89.0), np.radians(89.0))
            rotation = pnl.rotation_from_euler(alpha, beta, gamma)
            recomposed = pnl.rotation_from_euler(*pnl.euler_from_rotation(rotation))
            assert np.max(np.abs(recomposed - rotation)) < 1e-10

    @pytest.mark.parametrize("beta", [np.pi / 2, -np.pi / 2])
    def test_gimbal_lock_recomposes_and_zeroes_gamma(self, beta, rng):
        for _ in range(20):
            alpha = rng.uniform(-np.pi, np.pi)
            gamma = rng.uniform(-np.pi, np.pi)
            rotation = pnl.rotation_from_euler(alpha, beta, gamma)
            a, b, g = pnl.euler_from_rotation(rotation)
            assert g == 0.0
            recomposed = pnl.rotation_from_euler(a, b, g)
            assert np.max(np.abs(recomposed - rotation)) < 1e-10

    def test_beta_range(self, rng):
        from conftest import random_rotation

        for _ in range(200):
            _, beta, _ = pnl.euler_from_rotation(random_rotation(rng))
            assert -np.pi / 2 <= beta <= np.pi / 2

    def test_pose_euler_property(self):
        pose = pnl.CameraPose(pnl.rotation_from_euler(0.2, -0.4, 0.9), np.zeros(3))
        np.testing.assert_allclose(pose.euler_angles, [0.2, -0.4, 0.9], atol=1e-12)


class TestBilinearConstraintProperty:
    def test_ten_thousand_random_lines(self, rng):
        a = rng.normal(size=(10000, 3)) * 10
        b = rng.normal(size=(10000, 3)) * 10
        moments = np.cross(a, b)
        directions = b - a
        # same construction as plucker_from_endpoints at unit weights
        for i in range(0, 10000, 997):
            line = pnl.plucker_from_endpoints(a[i], b[i])
            np.testing.assert_allclose(line.direction, directions[i], atol=1e-12)
            assert_proportional(line.moment, moments[i], rtol=1e-9)
        dots = np.abs(np.einsum("ij,ij->i", moments, directions))
        norms = np.linalg.norm(moments, axis=1) * np.linalg.norm(directions, axis=1)
        assert np.all(dots <= 1e-10 * norms + 1e-12)
