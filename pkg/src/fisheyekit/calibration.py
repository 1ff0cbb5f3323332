"""Intrinsic calibration by reprojection-error minimization.

The unknowns are the free parameters of a projection model, the distortion
center, and one pose per view of the calibration target. ``pixel_scale`` is
held fixed because it is interchangeable with the model's focal scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .camera import CameraIntrinsics, unproject_points
from .errors import ConvergenceError, DegenerateData, DomainError, FisheyeError, ParameterError, ShapeError
from .lm import LMResult, levenberg_marquardt
from .models import MODEL_CLASSES, CameraModel, model_from_params

PENALTY = 1e3
MIN_POINTS_PER_VIEW = 6
# relative step of the internal five-point Jacobian stencil
JACOBIAN_STEP = 1e-4


@dataclass(frozen=True)
class Correspondence:
    world: tuple
    pixel: tuple
    view_id: int


class CorrespondenceSet:
    """Target points, their observed pixels, and the view each belongs to."""

    def __init__(self, world, pixels, view_ids, n_views=None):
        self.world = np.asarray(world, dtype=float).reshape(-1, 3)
        self.pixels = np.asarray(pixels, dtype=float).reshape(-1, 2)
        self.view_ids = np.asarray(view_ids, dtype=int).reshape(-1)
        if not (len(self.world) == len(self.pixels) == len(self.view_ids)):
            raise ShapeError("world, pixels and view_ids must have the same length")
        if len(self.world) == 0:
            raise ShapeError("correspondence set is empty")
        if not (np.all(np.isfinite(self.world)) and np.all(np.isfinite(self.pixels))):
            raise ShapeError("correspondences must be finite")
        if np.any(self.view_ids < 0):
            raise ShapeError("view ids must be non-negative")
        self.n_views = int(self.view_ids.max()) + 1 if n_views is None else int(n_views)
        if np.any(self.view_ids >= self.n_views):
            raise ShapeError("view id out of range")
        counts = np.bincount(self.view_ids, minlength=self.n_views)
        if np.any(counts < MIN_POINTS_PER_VIEW):
            raise ShapeError(
                f"every view needs at least {MIN_POINTS_PER_VIEW} points; counts per view: {counts.tolist()}"
            )

    @classmethod
    def from_items(cls, items, n_views=None):
        items = list(items)
        return cls(
            [c.world for c in items], [c.pixel for c in items], [c.view_id for c in items], n_views
        )

    @property
    def items(self) -> list[Correspondence]:
        return [
            Correspondence(tuple(w), tuple(p), int(v))
            for w, p, v in zip(self.world, self.pixels, self.view_ids)
        ]

    def __len__(self):
        return len(self.view_ids)

    def view_indices(self, view):
        return np.flatnonzero(self.view_ids == view)


@dataclass(frozen=True)
class ViewPose:
    """Target-to-camera transform: ``X_cam = rotation @ X_target + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if R.shape != (3, 3):
            raise ShapeError("rotation must be 3x3")
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-10 or np.linalg.det(R) < 0:
            raise ParameterError("rotation must be orthonormal with det +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def from_rotvec(cls, rotvec, translation):
        return cls(Rotation.from_rotvec(np.asarray(rotvec, dtype=float)).as_matrix(), translation)

    @property
    def rotvec(self) -> np.ndarray:
        return Rotation.from_matrix(self.rotation).as_rotvec()

    def transform(self, X):
        return np.asarray(X, dtype=float) @ self.rotation.T + self.translation


@dataclass
class FitResult:
    intrinsics: CameraIntrinsics
    poses: list
    rmse: float
    iterations: int
    converged: bool
    gradient_norm: float = math.nan
    cost_history: list = field(default_factory=list)
    message: str = ""


@dataclass(frozen=True)
class GridSpec:
    """Planar ``rows x cols`` target in its own z=0 plane, centered on the origin."""

    rows: int = 6
    cols: int = 8
    spacing: float = 0.1

    def points(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        x = (j.ravel() - 0.5 * (self.cols - 1)) * self.spacing
        y = (i.ravel() - 0.5 * (self.rows - 1)) * self.spacing
        return np.stack([x, y, np.zeros_like(x)], axis=1)


def look_at_pose(direction, distance, tilt=0.0, tilt_axis=(1.0, 0.0, 0.0)):
    """Pose placing a target's center at ``distance`` along ``direction``.

    The target faces the camera (its normal along the viewing direction) and is
    then rotated by ``tilt`` radians about ``tilt_axis`` in its own frame.
    """
    z = np.asarray(direction, dtype=float)
    z = z / np.linalg.norm(z)
    helper = np.array([0.0, 1.0, 0.0]) if abs(z[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    x = np.cross(helper, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    face = np.stack([x, y, z], axis=1)
    R = face @ Rotation.from_rotvec(tilt * np.asarray(tilt_axis, dtype=float)).as_matrix()
    return ViewPose(R, distance * z)


def default_poses(n_views=3, field_angle=0.9, distance=0.6, tilt=0.35):
    """Views spread around the optical axis so that the target spans wide field angles."""
    poses = [look_at_pose((0.0, 0.0, 1.0), distance, tilt, (1.0, 1.0, 0.0) / np.sqrt(2))]
    for k in range(1, n_views):
        az = 2.0 * math.pi * (k - 1) / max(n_views - 1, 1)
        d = (math.sin(field_angle) * math.cos(az), math.sin(field_angle) * math.sin(az), math.cos(field_angle))
        poses.append(look_at_pose(d, distance, -tilt * (-1) ** k, (0.0, 1.0, 0.0)))
    return poses


def generate_synthetic(intr, poses, grid=GridSpec(), noise_sigma=0.0, seed=0) -> CorrespondenceSet:
    """Project a planar grid through every pose and add Gaussian pixel noise.

    Raises:
        DomainError: if any grid point leaves the model's projectable set.
    """
    target = grid.points()
    world, pixels, views = [], [], []
    for v, pose in enumerate(poses):
        Xc = pose.transform(target)
        if not np.all(intr.model.contains(Xc)):
            raise DomainError(f"grid leaves the {intr.model.kind} domain in view {v}")
        world.append(target)
        pixels.append(intr.plane_to_pixels(intr.model.project_plane(Xc)))
        views.append(np.full(len(target), v))
    pixels = np.concatenate(pixels)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        pixels = pixels + rng.normal(0.0, noise_sigma, size=pixels.shape)
    return CorrespondenceSet(np.concatenate(world), pixels, np.concatenate(views), len(poses))


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


def _view_residuals(model, cx, cy, scale, R, t, world, pixels):
    Xc = world @ R.T + t
    valid = model.contains(Xc)
    with np.errstate(all="ignore"):
        uv = model.project_plane(Xc)
    res = np.column_stack([cx + scale * uv[:, 0], cy + scale * uv[:, 1]]) - pixels
    res[~valid] = PENALTY
    res[~np.isfinite(res)] = PENALTY
    return res.ravel()


def reprojection_residuals(intr: CameraIntrinsics, poses, data: CorrespondenceSet) -> np.ndarray:
    """Projected minus observed pixel, interleaved ``(du, dv)`` per correspondence.

    Points outside the model domain contribute a fixed penalty of 1e3 px per axis.
    """
    if len(poses) != data.n_views:
        raise ShapeError(f"expected {data.n_views} poses, got {len(poses)}")
    out = np.empty(2 * len(data))
    for v, pose in enumerate(poses):
        idx = data.view_indices(v)
        res = _view_residuals(intr.model, intr.cx, intr.cy, intr.pixel_scale, pose.rotation,
                              pose.translation, data.world[idx], data.pixels[idx])
        out[2 * idx] = res[0::2]
        out[2 * idx + 1] = res[1::2]
    return out


def rmse(residuals) -> float:
    r = np.asarray(residuals, dtype=float)
    return float(np.sqrt(np.mean(r * r)))


class CalibrationProblem:
    """Packs intrinsics and poses into one parameter vector for the optimizer.

    Layout: ``[free model params..., cx, cy, (rotvec, t) per view]``.
    """

    def __init__(self, data: CorrespondenceSet, template: CameraIntrinsics, fit_intrinsics=True):
        self.data = data
        self.template = template
        self.fit_intrinsics = fit_intrinsics
        params = template.model.params()
        self.fixed = {k: params[k] for k in template.model.gauge_params if k in params}
        self.free_names = [k for k in params if k not in self.fixed] if fit_intrinsics else []
        self.n_intr = len(self.free_names) + (2 if fit_intrinsics else 0)
        self._views = [data.view_indices(v) for v in range(data.n_views)]
        # row indices of each view inside the interleaved residual vector
        self._rows = [np.column_stack([2 * i, 2 * i + 1]).ravel() for i in self._views]

    @property
    def size(self):
        return self.n_intr + 6 * self.data.n_views

    def pack(self, intr: CameraIntrinsics, poses) -> np.ndarray:
        parts = []
        if self.fit_intrinsics:
            params = intr.model.params()
            parts.append([params[k] for k in self.free_names] + [intr.cx, intr.cy])
        for pose in poses:
            parts.append(np.concatenate([pose.rotvec, pose.translation]))
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def intrinsics(self, x) -> CameraIntrinsics:
        if not self.fit_intrinsics:
            return self.template
        model = model_from_params(
            self.template.model.kind, {**dict(zip(self.free_names, x[: len(self.free_names)])), **self.fixed}
        )
        k = len(self.free_names)
        return self.template.replace(model=model, cx=float(x[k]), cy=float(x[k + 1]))

    def _model_state(self, x):
        try:
            intr = self.intrinsics(x)
        except FisheyeError:
            return None
        return intr

    def _pose_block(self, x, v):
        b = x[self.n_intr + 6 * v : self.n_intr + 6 * v + 6]
        return Rotation.from_rotvec(b[:3]).as_matrix(), b[3:]

    def poses(self, x) -> list:
        return [ViewPose(*self._pose_block(x, v)) for v in range(self.data.n_views)]

    def _residuals_view(self, intr, x, v):
        R, t = self._pose_block(x, v)
        idx = self._views[v]
        return _view_residuals(intr.model, intr.cx, intr.cy, intr.pixel_scale, R, t,
                               self.data.world[idx], self.data.pixels[idx])

    def residuals(self, x) -> np.ndarray:
        intr = self._model_state(x)
        out = np.full(2 * len(self.data), PENALTY)
        if intr is None:
            return out
        for v in range(self.data.n_views):
            out[self._rows[v]] = self._residuals_view(intr, x, v)
        return out

    def jacobian(self, x) -> np.ndarray:
        """Block-structured five-point central-difference Jacobian.

        Pose columns only touch the rows of their own view. Intrinsic columns
        fall back to a one-sided second-order stencil when a perturbation would
        leave the valid parameter range.
        """
        x = np.asarray(x, dtype=float)
        J = np.zeros((2 * len(self.data), self.size))
        for j in range(self.n_intr):
            J[:, j] = self._intrinsic_column(x, j)
        intr = self._model_state(x)
        if intr is None:
            return J
        for v in range(self.data.n_views):
            rows = self._rows[v]
            for k in range(6):
                j = self.n_intr + 6 * v + k
                h = JACOBIAN_STEP * max(1.0, abs(x[j]))
                vals = []
                for m in (2, 1, -1, -2):
                    xs = x.copy()
                    xs[j] += m * h
                    vals.append(self._residuals_view(intr, xs, v))
                J[rows, j] = (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * h)
        return J

    def _intrinsic_column(self, x, j):
        h = JACOBIAN_STEP * max(1.0, abs(x[j]))

        def at(m):
            xs = x.copy()
            xs[j] += m * h
            return self.residuals(xs) if self._model_state(xs) is not None else None

        p2, p1, m1, m2 = at(2), at(1), at(-1), at(-2)
        if all(v is not None for v in (p2, p1, m1, m2)):
            return (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h)
        f0 = self.residuals(x)
        if p1 is not None and p2 is not None:
            return (-3 * f0 + 4 * p1 - p2) / (2 * h)
        if m1 is not None and m2 is not None:
            return (3 * f0 - 4 * m1 + m2) / (2 * h)
        raise DegenerateData(f"parameter {j} cannot be perturbed inside its valid range")


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------


def _skew(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _nearest_rotation(M):
    U, _, Vt = np.linalg.svd(M)
    R = U @ Vt
    if np.linalg.det(R) < 0:
        R = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return R


def pose_from_rays(rays, world) -> ViewPose:
    """Linear pose estimate from unit rays and their target points.

    Solves ``ray x (R X + t) = 0`` in the least-squares sense. Planar targets
    use the 9-unknown form on in-plane coordinates; rays may point behind the
    image plane, so this works beyond 90 degrees of field angle.
    """
    rays = np.asarray(rays, dtype=float)
    world = np.asarray(world, dtype=float)
    if len(rays) < MIN_POINTS_PER_VIEW:
        raise DegenerateData("too few valid rays for a pose estimate")
    center = world.mean(axis=0)
    _, sv, Vt = np.linalg.svd(world - center)
    planar = sv[2] < 1e-9 * max(sv[0], 1e-300)
    E = Vt.T  # columns: in-plane axes then normal
    if np.linalg.det(E) < 0:
        E[:, 2] = -E[:, 2]
    local = (world - center) @ E

    if planar:
        q = np.column_stack([local[:, :2], np.ones(len(local))])
    else:
        q = np.column_stack([local, np.ones(len(local))])
    n = q.shape[1]
    rows = [_skew(s) @ np.kron(np.eye(3), qi[None, :]) for s, qi in zip(rays, q)]
    _, _, Vt_h = np.linalg.svd(np.vstack(rows))
    H = Vt_h[-1].reshape(3, n)

    if planar:
        scale = 2.0 / (np.linalg.norm(H[:, 0]) + np.linalg.norm(H[:, 1]))
    else:
        scale = 1.0 / np.cbrt(abs(np.linalg.det(H[:, :3])))
    H = H * scale
    if np.sum(np.einsum("ij,ij->i", rays, q @ H.T)) < 0:
        H = -H
    if planar:
        M = np.column_stack([H[:, 0], H[:, 1], np.cross(H[:, 0], H[:, 1])])
    else:
        M = H[:, :3]
    R_local = _nearest_rotation(M)
    t_local = H[:, -1]
    R = R_local @ E.T
    return ViewPose(R, t_local - R @ center)


def _refine_poses(intr, data, poses, max_iter=50):
    """Pose-only refinement of every view with the intrinsics held fixed."""
    refined, total = [], 0.0
    for v, pose in enumerate(poses):
        idx = data.view_indices(v)
        sub = CorrespondenceSet(data.world[idx], data.pixels[idx], np.zeros(len(idx), dtype=int), 1)
        prob = CalibrationProblem(sub, intr, fit_intrinsics=False)
        res = levenberg_marquardt(prob.residuals, prob.pack(intr, [pose]), prob.jacobian,
                                  max_iter=max_iter, raise_on_cap=False)
        refined.append(prob.poses(res.x)[0])
        total += res.cost
    return refined, total


def initial_poses(intr, data, refine=True):
    """Pose of every view from rays lifted through ``intr``, optionally refined."""
    poses = []
    for v in range(data.n_views):
        idx = data.view_indices(v)
        rays, valid = unproject_points(intr, data.pixels[idx])
        poses.append(pose_from_rays(rays[valid], data.world[idx][valid]))
    if refine:
        poses, _ = _refine_poses(intr, data, poses)
    return poses


def nominal_model(family: str, scale: float, n_terms=None) -> CameraModel:
    """Generic starting model of a family whose focal-like parameter is ``scale``."""
    cls = MODEL_CLASSES.get(family)
    if cls is None:
        raise ParameterError(f"unknown model family {family!r}")
    s = float(scale)
    if family == "polynomial_odd":
        return cls((s,) + (0.0,) * ((n_terms or 4) - 1))
    if family == "polynomial_mixed":
        return cls((s, 0.0, 0.0, 0.0))
    if family == "onimage_polynomial":
        return cls((s,) + (0.0,) * ((n_terms or 3) - 1))
    defaults = {
        "division": {"a": 0.25 / (s * s), "f": s},
        "fov": {"omega": 1.0, "f": s},
        "ucm": {"alpha": 0.5, "f": s},
        "eucm": {"alpha": 0.5, "beta": 1.0, "f": s},
        "double_sphere": {"xi": 0.1, "alpha": 0.5, "f": s},
        "general_perspective": {"f_p": 2.0 * s, "f_s": 1.0, "d": 1.0},
    }
    return cls.from_params(defaults.get(family, {"f": s}))


def initial_intrinsics(data, family, width, height, pixel_scale, n_terms=None, n_candidates=24):
    """Grid search over the focal scale of a nominal model.

    The center starts at the image center. For each candidate scale the poses
    are estimated from lifted rays and refined; the candidate with the lowest
    reprojection cost wins.
    """
    cx, cy = 0.5 * (width - 1), 0.5 * (height - 1)
    radius = np.max(np.hypot(data.pixels[:, 0] - cx, data.pixels[:, 1] - cy)) / pixel_scale
    base = max(radius / (0.5 * math.pi), 1e-6)
    best = None
    for s in np.geomspace(0.1, 5.0, n_candidates) * base:
        try:
            intr = CameraIntrinsics(nominal_model(family, s, n_terms), cx, cy, pixel_scale, width, height)
            poses = initial_poses(intr, data, refine=False)
            poses, cost = _refine_poses(intr, data, poses, max_iter=20)
        except (FisheyeError, np.linalg.LinAlgError):
            continue
        if best is None or cost < best[0]:
            best = (cost, intr, poses)
    if best is None:
        raise DegenerateData(f"no usable starting point found for family {family!r}")
    return best[1], best[2]


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def fit(data: CorrespondenceSet, family: str, init: CameraIntrinsics | None = None, *,
        init_poses=None, image_size=None, pixel_scale=None, n_terms=None, max_iter=100) -> FitResult:
    """Fit a model family, distortion center and view poses to correspondences.

    Args:
        data: Observed correspondences.
        family: Model kind to fit (e.g. ``"ucm"``).
        init: Starting intrinsics. When omitted, ``image_size=(w, h)`` and
            ``pixel_scale`` are required and a grid search supplies the start.
        init_poses: Optional starting poses; estimated from rays otherwise.

    Raises:
        ConvergenceError: iteration cap reached; ``.result`` holds the last FitResult.
        DegenerateData: rank-deficient problem.
    """
    if init is None:
        if image_size is None or pixel_scale is None:
            raise ParameterError("fit without init needs image_size and pixel_scale")
        init, poses = initial_intrinsics(data, family, image_size[0], image_size[1], pixel_scale, n_terms)
    else:
        if init.model.kind != family:
            raise ParameterError(f"init model is {init.model.kind!r}, expected {family!r}")
        poses = list(init_poses) if init_poses is not None else initial_poses(init, data)

    problem = CalibrationProblem(data, init)
    try:
        res = levenberg_marquardt(problem.residuals, problem.pack(init, poses), problem.jacobian,
                                  max_iter=max_iter)
    except ConvergenceError as exc:
        raise ConvergenceError(str(exc), _to_fit_result(problem, exc.result)) from None
    return _to_fit_result(problem, res)


def _to_fit_result(problem: CalibrationProblem, res: LMResult) -> FitResult:
    return FitResult(
        intrinsics=problem.intrinsics(res.x),
        poses=problem.poses(res.x),
        rmse=rmse(res.residuals),
        iterations=res.iterations,
        converged=res.converged,
        gradient_norm=res.gradient_norm,
        cost_history=res.cost_history,
        message=res.message,
    )
