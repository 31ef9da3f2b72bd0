"""File formats and intrinsics handling.

Line sets travel as CSV with a mandatory header row; the header decides the
record form.  3D lines are either endpoint records (id, ax..az, bx..bz,
optional aw/bw) or raw Plücker records (id, ux..uz, vx..vz).  2D lines are
either pixel endpoint records (id, x1, y1, x2, y2) or raw normalized-plane
records (id, lx, ly, lw).  Intrinsics and poses travel as JSON.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .dlt import Correspondence
from .errors import (
    CoincidentEndpoints,
    ConstraintViolation,
    JoinError,
    ParseError,
    SingularIntrinsics,
)
from .geometry import (
    CameraPose,
    ImageLine2D,
    PluckerLine,
    orthogonalized_moment,
    plucker_from_endpoints,
)

# Measured Plüccker input may violate the bilinear constraint up to this
# relative tolerance; beyond it the record is rejected.
RAW_PLUCKER_RTOL = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels: focal lengths, principal point, skew."""

    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise SingularIntrinsics(
                f"focal lengths must be positive (fx={self.fx}, fy={self.fy})"
            )

    @property
    def ray_matrix(self):
        """Pixel-to-ray mapping: ray = K_ray @ (px, py, 1).

        Rays live on the plane z = -1 (points in front of the camera have
        negative z), so the ray of pixel (px, py) is
        ((px - cx - skew * yn) / fx, (py - cy) / fy, -1).
        """
        return np.array([
            [1.0 / self.fx, -self.skew / (self.fx * self.fy),
             self.skew * self.cy / (self.fx * self.fy) - self.cx / self.fx],
            [0.0, 1.0 / self.fy, -self.cy / self.fy],
            [0.0, 0.0, -1.0],
        ])

    def pixel_to_ray(self, pixels):
        """Camera-frame rays of pixel points; pixels has shape (..., 2)."""
        px = np.asarray(pixels, dtype=float)
        ones = np.ones(px.shape[:-1] + (1,))
        return np.concatenate([px, ones], axis=-1) @ self.ray_matrix.T


#: Ray mapping that reads pixel coordinates directly as normalized-plane
#: coordinates (used when no intrinsics are supplied).
IDENTITY_INTRINSICS = Intrinsics(1.0, 1.0, 0.0, 0.0)


def line2d_from_endpoints(endpoint_a, endpoint_b, intrinsics=IDENTITY_INTRINSICS):
    """2D line through two pixel endpoints, as the cross product of their rays.

    Raises CoincidentEndpoints when the endpoints map to parallel rays.
    """
    rays = intrinsics.pixel_to_ray(np.array([endpoint_a, endpoint_b], dtype=float))
    coeffs = np.cross(rays[0], rays[1])
    if np.linalg.norm(coeffs) < 1e-12 * np.linalg.norm(rays[0]) * np.linalg.norm(rays[1]):
        raise CoincidentEndpoints(
            f"endpoints {tuple(endpoint_a)} and {tuple(endpoint_b)} coincide"
        )
    return ImageLine2D(coeffs)


def apply_intrinsics(pixel_line, intrinsics):
    """Map a pixel-frame 2D line onto the normalized image plane.

    A pixel point q on the input satisfies the output on its ray
    K_ray @ q, so the output is the inverse-transpose of the ray mapping
    applied to the pixel line.
    """
    coeffs = np.asarray(pixel_line, dtype=float)
    if isinstance(pixel_line, ImageLine2D):
        coeffs = pixel_line.coeffs
    return ImageLine2D(np.linalg.inv(intrinsics.ray_matrix).T @ coeffs)


def line_to_pixel_coeffs(line, intrinsics):
    """Inverse of :func:`apply_intrinsics`: normalized-plane line to pixel frame."""
    return intrinsics.ray_matrix.T @ line.coeffs


def read_intrinsics_json(path):
    with open(path) as fh:
        data = json.load(fh)
    try:
        return Intrinsics(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            skew=float(data.get("skew", 0.0)),
        )
    except KeyError as exc:
        raise ParseError(f"intrinsics file {path} is missing key {exc}") from exc


_SCHEMA_3D_ENDPOINTS = ("ax", "ay", "az", "bx", "by", "bz")
_SCHEMA_3D_PLUCKER = ("ux", "uy", "uz", "vx", "vy", "vz")
_SCHEMA_2D_ENDPOINTS = ("x1", "y1", "x2", "y2")
_SCHEMA_2D_RAW = ("lx", "ly", "lw")


def _read_rows(path, schemas):
    """Yield (id, values, line_number) rows; returns the matched schema."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames
        if fields is None:
            raise ParseError(f"{path}: empty file", line_number=1)
        fields = [f.strip() for f in fields]
        matched = None
        for schema in schemas:
            if "id" in fields and all(col in fields for col in schema):
                matched = schema
                break
        if matched is None:
            raise ParseError(
                f"{path}: header {fields} matches no supported schema "
                f"(expected id plus one of {[list(s) for s in schemas]})",
                line_number=1,
            )
        rows = []
        for row in reader:
            line_number = reader.line_num
            ident = (row.get("id") or "").strip()
            if not ident:
                raise ParseError(f"{path}: missing id", line_number=line_number)
            try:
                values = {col: float(row[col]) for col in matched}
            except (TypeError, ValueError) as exc:
                raise ParseError(
                    f"{path}: non-numeric value ({exc})", line_number=line_number
                ) from exc
            optional = {}
            for col in ("aw", "bw"):
                if col in fields and row.get(col) not in (None, ""):
                    try:
                        optional[col] = float(row[col])
                    except ValueError as exc:
                        raise ParseError(
                            f"{path}: non-numeric value in column {col}",
                            line_number=line_number,
                        ) from exc
            rows.append((ident, values, optional, line_number))
    return matched, rows


def _canonical_plucker(moment, direction):
    """Measured Plücker input, projected exactly onto the constraint manifold."""
    return PluckerLine(orthogonalized_moment(moment, direction), direction)


def parse_correspondences(path3d, path2d, intrinsics=None):
    """Read matched 3D/2D line files into correspondences (weights all 1).

    Pixel endpoint records are converted through ``intrinsics`` (identity
    ray mapping when omitted); raw 2D records are taken as normalized-plane
    lines.  Raw Plücker records must satisfy the bilinear constraint to
    within 1e-6 relative (measured-data tolerance) and are then projected
    exactly onto the constraint manifold.

    Raises ParseError (with line number), ConstraintViolation, or JoinError.
    """
    if intrinsics is None:
        intrinsics = IDENTITY_INTRINSICS
    schema3d, rows3d = _read_rows(path3d, (_SCHEMA_3D_ENDPOINTS, _SCHEMA_3D_PLUCKER))
    schema2d, rows2d = _read_rows(path2d, (_SCHEMA_2D_ENDPOINTS, _SCHEMA_2D_RAW))

    lines3d = {}
    for ident, vals, optional, line_number in rows3d:
        if ident in lines3d:
            raise ParseError(f"{path3d}: duplicate id {ident!r}", line_number=line_number)
        if schema3d is _SCHEMA_3D_ENDPOINTS:
            a = [vals["ax"], vals["ay"], vals["az"], optional.get("aw", 1.0)]
            b = [vals["bx"], vals["by"], vals["bz"], optional.get("bw", 1.0)]
            lines3d[ident] = plucker_from_endpoints(a, b)
        else:
            moment = np.array([vals["ux"], vals["uy"], vals["uz"]])
            direction = np.array([vals["vx"], vals["vy"], vals["vz"]])
            nm, nd = np.linalg.norm(moment), np.linalg.norm(direction)
            if nm == 0.0 and nd == 0.0:
                raise ParseError(
                    f"{path3d}: zero Plücker vector for id {ident!r}",
                    line_number=line_number,
                )
            if abs(float(moment @ direction)) > RAW_PLUCKER_RTOL * nm * nd:
                raise ConstraintViolation(
                    f"{path3d} line {line_number}: id {ident!r} violates the "
                    f"bilinear constraint (u.v / |u||v| = "
                    f"{float(moment @ direction) / (nm * nd):.3e})"
                )
            lines3d[ident] = _canonical_plucker(moment, direction)

    correspondences = []
    seen2d = set()
    for ident, vals, _, line_number in rows2d:
        if ident in seen2d:
            raise ParseError(f"{path2d}: duplicate id {ident!r}", line_number=line_number)
        seen2d.add(ident)
        if ident not in lines3d:
            raise JoinError(f"2D id {ident!r} has no matching 3D record")
        if schema2d is _SCHEMA_2D_ENDPOINTS:
            line2d = line2d_from_endpoints(
                (vals["x1"], vals["y1"]), (vals["x2"], vals["y2"]), intrinsics
            )
        else:
            coeffs = np.array([vals["lx"], vals["ly"], vals["lw"]])
            if not coeffs.any():
                raise ParseError(
                    f"{path2d}: zero 2D line for id {ident!r}",
                    line_number=line_number,
                )
            line2d = ImageLine2D(coeffs)
        correspondences.append(Correspondence(lines3d[ident], line2d))
    return correspondences


def _fmt(x):
    return format(float(x), ".17g")


def write_correspondences(correspondences, path3d, path2d, ids=None):
    """Write a correspondence set as raw Plücker + raw 2D line CSV files."""
    if ids is None:
        ids = [str(i) for i in range(len(correspondences))]
    with open(path3d, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "ux", "uy", "uz", "vx", "vy", "vz"])
        for ident, c in zip(ids, correspondences):
            writer.writerow([ident] + [_fmt(v) for v in c.line3d.vector])
    with open(path2d, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "lx", "ly", "lw"])
        for ident, c in zip(ids, correspondences):
            writer.writerow([ident] + [_fmt(v) for v in c.line2d.coeffs])


def write_lines2d_csv(ids, lines, fh):
    """Write 2D lines as CSV rows (id, lx, ly, lw) to an open file."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["id", "lx", "ly", "lw"])
    for ident, line in zip(ids, lines):
        writer.writerow([ident] + [_fmt(v) for v in line.coeffs])


def pose_to_dict(pose, scale=None, candidate=None, diagnostics=None):
    """JSON-ready dict for a camera pose with optional solver metadata."""
    alpha, beta, gamma = pose.euler_angles
    data = {
        "rotation": [float(v) for v in pose.rotation.ravel()],
        "position": [float(v) for v in pose.position],
        "euler_deg": {
            "alpha_x": float(np.degrees(alpha)),
            "beta_y": float(np.degrees(beta)),
            "gamma_z": float(np.degrees(gamma)),
        },
    }
    if scale is not None:
        data["scale"] = float(scale)
    if candidate is not None:
        data["candidate"] = candidate
    if diagnostics is not None:
        data["diagnostics"] = diagnostics
    return data


def solution_to_dict(solution, aor_result=None):
    """JSON-ready dict for a PoseSolution (optionally from an AOR run)."""
    diagnostics = {
        "conditioning": float(solution.diagnostics.conditioning),
        "residual_rms": float(solution.diagnostics.residual_rms),
        "prenormalized": solution.diagnostics.prenormalized,
        "n_correspondences": solution.diagnostics.n_active,
        "inlier_count": solution.diagnostics.n_active,
    }
    if aor_result is not None:
        diagnostics["inlier_count"] = int(aor_result.inlier_mask.sum())
        diagnostics["aor_iterations"] = int(aor_result.iterations)
        diagnostics["aor_final_error"] = float(aor_result.final_error)
    return pose_to_dict(
        solution.pose,
        scale=solution.scale,
        candidate=solution.chosen_candidate,
        diagnostics=diagnostics,
    )


def read_pose_json(path):
    """Read a pose JSON file (as written by the estimate command)."""
    with open(path) as fh:
        data = json.load(fh)
    try:
        rotation = np.array(data["rotation"], dtype=float).reshape(3, 3)
        position = np.array(data["position"], dtype=float)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"pose file {path}: {exc}") from exc
    return CameraPose(rotation, position)
