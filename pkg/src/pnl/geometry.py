"""Plücker line geometry: line construction, rigid transforms, and linear
projection of 3D lines onto the normalized image plane.

Conventions
-----------
World and camera frames are right-handed.  The camera x-axis points right,
the y-axis up, and the z-axis behind the camera, so points in front of the
camera have negative z in the camera frame.  A homogeneous point transforms
into the camera frame as ``X_c = [R, -R t; 0, 1] X_w`` where ``R`` is the
camera orientation (rotations about z, y, x by angles gamma, beta, alpha)
and ``t`` the camera position in the world frame.

A 3D line is the homogeneous 6-vector ``(moment, direction)``: ``direction``
points along the line and ``moment`` is the normal of the plane spanned by
the line and the origin (the interpretation plane, once in the camera
frame).  Both are defined up to a common nonzero scale and must satisfy
``moment . direction = 0``.

A point on the normalized image plane is represented by its camera-frame
ray (the Euclidean part of its camera coordinates, at any positive scale);
with that choice the projected 2D line equals the camera-frame moment
vector and no sign fix-up is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, LineThroughCameraCenter

# Relative tolerance of the bilinear constraint |u.v| <= tol * |u||v|,
# sized for double precision at meter scales (~1e3 headroom over eps).
BILINEAR_RTOL = 1e-10
ORTHONORMALITY_TOL = 1e-10


def _as_float_array(values, shape, name):
    arr = np.asarray(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _frozen(arr):
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def homogeneous_point(point):
    """Coerce a 3- or 4-vector to a homogeneous 3D point (w appended as 1).

    Raises ValueError if all four components vanish.
    """
    arr = np.asarray(point, dtype=float)
    if arr.shape == (3,):
        arr = np.append(arr, 1.0)
    if arr.shape != (4,):
        raise ValueError(f"expected a 3- or 4-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    if not arr.any():
        raise ValueError("homogeneous point must not be the zero vector")
    return arr


def skew_matrix(v):
    """3x3 cross-product matrix: skew_matrix(v) @ x == cross(v, x)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def orthogonalized_moment(moment, direction):
    """Project a line moment onto the constraint manifold (moment ⊥ direction).

    Constraint-preserving constructions (endpoint join, rigid transforms,
    translations) satisfy moment . direction = 0 symbolically; this removes
    the floating-point residue so the strict type invariant holds even when
    the moment is many orders of magnitude smaller than the inputs (a line
    passing close to the frame origin).
    """
    n2 = float(direction @ direction)
    if n2 > 0.0:
        return moment - direction * (float(moment @ direction) / n2)
    return moment


def unskew(m):
    """Inverse of :func:`skew_matrix` for a skew-symmetric 3x3 matrix."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


@dataclass(frozen=True, eq=False)
class PluckerLine:
    """Homogeneous Plücker coordinates of a 3D line.

    ``moment`` is the interpretation-plane normal, ``direction`` the line
    direction.  Construction enforces the bilinear constraint
    ``moment . direction = 0`` (relative to ``|moment| |direction|``) and
    rejects the all-zero pair.  Instances are immutable.
    """

    moment: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        m = _as_float_array(self.moment, (3,), "moment")
        d = _as_float_array(self.direction, (3,), "direction")
        nm, nd = np.linalg.norm(m), np.linalg.norm(d)
        if nm == 0.0 and nd == 0.0:
            raise ValueError("moment and direction must not both be zero")
        if abs(float(m @ d)) > BILINEAR_RTOL * nm * nd:
            raise ValueError(
                f"bilinear constraint violated: moment.direction = {m @ d:.3e} "
                f"exceeds {BILINEAR_RTOL:g} * |moment| * |direction|"
            )
        object.__setattr__(self, "moment", _frozen(m))
        object.__setattr__(self, "direction", _frozen(d))

    @property
    def vector(self):
        """The homogeneous 6-vector, moment part first."""
        return np.concatenate([self.moment, self.direction])

    def closest_point_to_origin(self):
        """Point of the line nearest the origin: cross(v, u) / |v|^2."""
        n2 = float(self.direction @ self.direction)
        if n2 == 0.0:
            raise ValueError("line at infinity has no closest point")
        return np.cross(self.direction, self.moment) / n2


@dataclass(frozen=True, eq=False)
class ImageLine2D:
    """Homogeneous 2D line on the normalized image plane (nonzero 3-vector)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = _as_float_array(self.coeffs, (3,), "coeffs")
        if not c.any():
            raise ValueError("2D line coefficients must not all be zero")
        object.__setattr__(self, "coeffs", _frozen(c))

    def unit(self):
        """Copy scaled to unit Euclidean norm."""
        return ImageLine2D(self.coeffs / np.linalg.norm(self.coeffs))


@dataclass(frozen=True, eq=False)
class CameraPose:
    """Camera orientation ``rotation`` and position ``position`` in the world frame."""

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        r = _as_float_array(self.rotation, (3, 3), "rotation")
        t = _as_float_array(self.position, (3,), "position")
        if np.max(np.abs(r.T @ r - np.eye(3))) > ORTHONORMALITY_TOL:
            raise ValueError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > ORTHONORMALITY_TOL:
            raise ValueError("rotation matrix determinant is not +1")
        object.__setattr__(self, "rotation", _frozen(r))
        object.__setattr__(self, "position", _frozen(t))

    @property
    def euler_angles(self):
        """(alpha, beta, gamma): rotation angles about x, y, z (applied z first)."""
        return euler_from_rotation(self.rotation)


@dataclass(frozen=True, eq=False)
class LineMotionMatrix:
    """6x6 matrix mapping world Plücker lines to camera-frame Plücker lines."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_float_array(self.matrix, (6, 6), "matrix")
        if m[3:, :3].any():
            raise ValueError("lower-left 3x3 block must be exactly zero")
        if not np.array_equal(m[:3, :3], m[3:, 3:]):
            raise ValueError("diagonal blocks must be identical")
        r = m[:3, :3]
        if np.max(np.abs(r.T @ r - np.eye(3))) > ORTHONORMALITY_TOL:
            raise ValueError("diagonal blocks must be orthonormal")
        object.__setattr__(self, "matrix", _frozen(m))


@dataclass(frozen=True, eq=False)
class LineProjectionMatrix:
    """3x6 matrix mapping world Plücker lines to normalized-plane 2D lines.

    Exactly constrained instances have an orthonormal left block and a right
    block of the form ``R [-t]_x``; estimates may violate both, so only the
    shape is validated here.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_float_array(self.matrix, (3, 6), "matrix")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def left(self):
        """Left 3x3 block (rotation estimate)."""
        return self.matrix[:, :3]

    @property
    def right(self):
        """Right 3x3 block (rotation times translation skew)."""
        return self.matrix[:, 3:]


def plucker_from_endpoints(point_a, point_b):
    """Plücker line through two distinct homogeneous 3D points.

    moment = a_eu x b_eu, direction = a_w * b_eu - b_w * a_eu; the result
    satisfies the bilinear constraint identically.  Swapping the arguments
    negates the 6-vector (same projective line).

    Raises CoincidentPoints when the points agree up to scale.
    """
    a = homogeneous_point(point_a)
    b = homogeneous_point(point_b)
    moment = np.cross(a[:3], b[:3])
    direction = a[3] * b[:3] - b[3] * a[:3]
    # Scale-invariant coincidence test on unit-normalized points.
    an, bn = a / np.linalg.norm(a), b / np.linalg.norm(b)
    if max(np.linalg.norm(np.cross(an[:3], bn[:3])),
           np.linalg.norm(an[3] * bn[:3] - bn[3] * an[:3])) < 1e-12:
        raise CoincidentPoints("endpoints coincide up to scale")
    return PluckerLine(orthogonalized_moment(moment, direction), direction)


def line_motion_matrix(pose):
    """6x6 motion matrix [[R, R [-t]_x], [0, R]] for the given pose."""
    r = pose.rotation
    upper_right = r @ skew_matrix(-pose.position)
    m = np.zeros((6, 6))
    m[:3, :3] = r
    m[:3, 3:] = upper_right
    m[3:, 3:] = r
    return LineMotionMatrix(m)


def line_projection_matrix(pose):
    """3x6 projection matrix [R | R [-t]_x], the top half of the motion matrix."""
    r = pose.rotation
    return LineProjectionMatrix(np.hstack([r, r @ skew_matrix(-pose.position)]))


def transform_line(motion, line):
    """Map a world-frame line into the camera frame: L_c = T L_w."""
    vec = motion.matrix @ line.vector
    return PluckerLine(orthogonalized_moment(vec[:3], vec[3:]), vec[3:])


def project_line(projection, line):
    """Project a world-frame line onto the normalized image plane: l = P L.

    Raises LineThroughCameraCenter when the image is undefined because the
    line passes through the projection center (P L vanishes).
    """
    coeffs = projection.matrix @ line.vector
    if np.linalg.norm(coeffs) < 1e-12 * np.linalg.norm(line.vector):
        raise LineThroughCameraCenter(
            "line passes through the projection center; no image line exists"
        )
    return ImageLine2D(coeffs)


def camera_ray(pose, point):
    """Camera-frame ray of a homogeneous world point: R (x - t w).

    For points with positive w this is a positive multiple of the Euclidean
    camera coordinates, i.e. the normalized-image representation used
    throughout this package.
    """
    p = homogeneous_point(point)
    return pose.rotation @ (p[:3] - pose.position * p[3])


def point_in_front(pose, point):
    """True when the world point lies in front of the camera (z_c / w < 0)."""
    p = homogeneous_point(point)
    if p[3] == 0.0:
        raise ValueError("point at infinity is neither in front nor behind")
    return camera_ray(pose, p)[2] / p[3] < 0.0


def rotation_from_euler(alpha, beta, gamma):
    """Rotation from consecutive rotations about z, y, x by gamma, beta, alpha."""
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]])
    ry = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    rz = np.array([[cg, -sg, 0.0], [sg, cg, 0.0], [0.0, 0.0, 1.0]])
    return rx @ ry @ rz


def euler_from_rotation(rotation):
    """Angles (alpha, beta, gamma) with rotation == Rx(alpha) Ry(beta) Rz(gamma).

    beta lies in [-pi/2, pi/2].  At the gimbal-lock poles (|beta| = pi/2)
    gamma is set to 0 by convention and alpha absorbs the remaining freedom.
    """
    r = np.asarray(rotation, dtype=float)
    sb = np.clip(r[0, 2], -1.0, 1.0)
    beta = np.arcsin(sb)
    if abs(sb) >= 1.0 - 1e-12:
        # cos(beta) ~ 0: with gamma := 0, row 2 reads (sa*sb, ca, -sa*cb).
        sign = 1.0 if sb > 0 else -1.0
        alpha = np.arctan2(sign * r[1, 0], r[1, 1])
        gamma = 0.0
    else:
        alpha = np.arctan2(-r[1, 2], r[2, 2])
        gamma = np.arctan2(-r[0, 1], r[0, 0])
    return float(alpha), float(beta), float(gamma)
