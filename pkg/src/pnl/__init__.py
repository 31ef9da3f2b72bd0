"""Camera pose estimation from 3D/2D line correspondences.

The estimator parameterizes 3D lines with Plücker coordinates, fits the
3x6 line projection matrix by homogeneous least squares on n >= 9
correspondences, and extracts the camera rotation and position by scale
recovery, essential-like decomposition, and in-front disambiguation.  An
algebraic outlier-rejection loop handles mismatched correspondences, and a
seeded Monte Carlo benchmark reproduces the standard synthetic evaluation.
"""

from . import errors
from .aor import AorConfig, AorResult, estimate_pose_aor, quantile_threshold
from .bench import (
    BenchConfig,
    PoseError,
    TrialRecord,
    add_endpoint_noise,
    apply_outliers,
    correspondences_from_pixels,
    generate_scene,
    pose_errors,
    project_points_to_pixels,
    run_monte_carlo,
    summarize,
    write_records_csv,
)
from .dlt import (
    Correspondence,
    DltDiagnostics,
    MeasurementSystem,
    build_measurement_matrix,
    correspondence_residuals,
    estimate_projection_matrix,
    solve_homogeneous_lsq,
)
from .geometry import (
    CameraPose,
    ImageLine2D,
    LineMotionMatrix,
    LineProjectionMatrix,
    PluckerLine,
    camera_ray,
    euler_from_rotation,
    homogeneous_point,
    line_motion_matrix,
    line_projection_matrix,
    orthogonalized_moment,
    plucker_from_endpoints,
    point_in_front,
    project_line,
    rotation_from_euler,
    skew_matrix,
    transform_line,
    unskew,
)
from .io import (
    Intrinsics,
    apply_intrinsics,
    line2d_from_endpoints,
    parse_correspondences,
    read_pose_json,
    write_correspondences,
)
from .pose import (
    DecompositionResult,
    PoseCandidate,
    decompose_essential_like,
    disambiguate,
    extract_pose,
    recover_scale,
)
from .prenorm import (
    Normalization2D,
    Normalization3D,
    closest_point_to_lines,
    denormalize_projection,
    normalize_2d_lines,
    translate_lines,
)
from .solver import PoseSolution, estimate_camera_pose

__version__ = "0.1.0"
