"""Fisheye camera models, equivalences, calibration, rectification and epipolar geometry."""

from .camera import (
    CameraIntrinsics,
    domain_contains,
    image_domain_contains,
    onimage_distort,
    onimage_undistort,
    project,
    project_points,
    radial,
    radial_inv,
    theta_max,
    unproject,
    unproject_points,
)
from .calibration import (
    Correspondence,
    CorrespondenceSet,
    FitResult,
    GridSpec,
    ViewPose,
    fit,
    generate_synthetic,
    reprojection_residuals,
)
from .epipolar import (
    RelativePose,
    epipolar_residual,
    essential_from_pose,
    horizon_samples,
    line_image_samples,
    triangulate_midpoint,
    vanishing_points,
)
from .equivalence import table1, verify_equivalence
from .errors import (
    ConvergenceError,
    DegenerateData,
    DegenerateInput,
    DomainError,
    FisheyeError,
    FormatError,
    ParameterError,
    ShapeError,
)
from .models import (
    EUCM,
    UCM,
    CameraModel,
    Division,
    DoubleSphere,
    Equidistant,
    ExtendedEquidistant,
    ExtendedOrthographic,
    FieldOfView,
    GeneralPerspective,
    OnImagePolynomial,
    Orthographic,
    Pinhole,
    PolynomialMixed,
    PolynomialOdd,
    Stereographic,
    model_from_params,
)
from .rectification import RemapTable, ViewportSpec, build_remap, warp

__version__ = "0.1.0"
