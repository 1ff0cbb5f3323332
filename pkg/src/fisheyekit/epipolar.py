"""Two-view and single-view geometry on the viewing sphere.

Rays are unit vectors in a camera frame. A relative pose maps camera-1
coordinates to camera-2 coordinates as ``X2 = R @ X1 + t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, project_points
from .errors import DegenerateInput, DomainError, ParameterError, ShapeError

ORTHONORMAL_TOL = 1e-10
UNIT_TOL = 1e-12
EPIPOLE_TOL = 1e-14
PARALLEL_TOL = 1e-8


@dataclass(frozen=True)
class RelativePose:
    """Rigid motion from camera 1 to camera 2 with a unit-length baseline."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if R.shape != (3, 3) or t.shape != (3,):
            raise ShapeError("rotation must be 3x3 and translation a 3-vector")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise ParameterError("pose contains non-finite values")
        if np.max(np.abs(R.T @ R - np.eye(3))) > ORTHONORMAL_TOL or np.linalg.det(R) < 0:
            raise ParameterError("rotation must be a proper orthonormal matrix")
        if abs(np.linalg.norm(t) - 1.0) > UNIT_TOL:
            raise ParameterError(f"translation must have unit norm, got {np.linalg.norm(t)}")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def normalized(cls, rotation, translation) -> "RelativePose":
        """Build a pose, rescaling the translation to unit length."""
        t = np.asarray(translation, dtype=float)
        norm = np.linalg.norm(t)
        if not norm > 0:
            raise ParameterError("translation must be nonzero")
        return cls(rotation, t / norm)

    @property
    def center2(self) -> np.ndarray:
        """Center of camera 2 expressed in the camera-1 frame."""
        return -self.rotation.T @ self.translation


def skew(v) -> np.ndarray:
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def essential_from_pose(pose: RelativePose) -> np.ndarray:
    """``E = [t]x R``, so that ``s2 @ E @ s1 == 0`` for rays of one 3D point."""
    return skew(pose.translation) @ pose.rotation


def epipolar_residual(E, s1, s2):
    """Angular distance (radians) of ``s2`` from the epipolar plane of ``s1``.

    Works on single rays or batches ``(N, 3)``. When ``s1`` is an epipole
    (``|E s1| < 1e-14``) every epipolar plane contains it and the residual is 0.
    """
    E = np.asarray(E, dtype=float)
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if s1.shape[-1:] != (3,) or s2.shape[-1:] != (3,):
        raise ShapeError("rays must have trailing dimension 3")
    normal = s1 @ E.T
    norm = np.linalg.norm(normal, axis=-1)
    at_epipole = norm < EPIPOLE_TOL
    safe = np.where(at_epipole, 1.0, norm)
    s2n = s2 / np.linalg.norm(s2, axis=-1, keepdims=True)
    sin = np.abs(np.sum(s2n * normal, axis=-1)) / safe
    res = np.where(at_epipole, 0.0, np.arcsin(np.minimum(sin, 1.0)))
    return float(res) if res.ndim == 0 else res


def triangulate_midpoint(s1, s2, pose: RelativePose) -> np.ndarray:
    """Midpoint of the shortest segment joining the two viewing rays, in the camera-1 frame.

    Raises:
        DegenerateInput: if the rays are parallel to within 1e-8 rad.
    """
    a = np.asarray(s1, dtype=float)
    a = a / np.linalg.norm(a)
    b = pose.rotation.T @ np.asarray(s2, dtype=float)
    b = b / np.linalg.norm(b)
    c2 = pose.center2
    cross = np.cross(a, b)
    sin = np.linalg.norm(cross)
    if sin < PARALLEL_TOL:
        raise DegenerateInput("rays are parallel; the point lies on the baseline or at infinity")
    # Solve l1*a - l2*b = c2 in the least-squares sense.
    ab = a @ b
    rhs = np.array([a @ c2, b @ c2])
    denom = 1.0 - ab * ab
    l1 = (rhs[0] - ab * rhs[1]) / denom
    l2 = (ab * rhs[0] - rhs[1]) / denom
    return 0.5 * (l1 * a + (c2 + l2 * b))


def _pixel_or_none(intr, direction):
    px, ok = project_points(intr, direction)
    return px if bool(ok) else None


def vanishing_points(intr: CameraIntrinsics, direction):
    """Images of the two antipodal points at infinity of a direction.

    Returns:
        (first, second): pixel positions of ``+direction`` and ``-direction``;
        either may be None when outside the model's domain.

    Raises:
        DomainError: if neither is projectable.
    """
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if d.shape != (3,) or not (np.isfinite(norm) and norm > 0):
        raise ParameterError("direction must be a nonzero 3-vector")
    d = d / norm
    first, second = _pixel_or_none(intr, d), _pixel_or_none(intr, -d)
    if first is None and second is None:
        raise DomainError(f"neither vanishing point is visible to the {intr.model.kind} model")
    return first, second


def _valid_interval(valid_fn, lo, hi, samples=4096, bisect_steps=60):
    """Longest run of parameters in (lo, hi) where ``valid_fn`` holds, endpoints refined."""
    phi = np.linspace(lo, hi, samples + 2)[1:-1]
    ok = valid_fn(phi)
    if not np.any(ok):
        return None
    # longest run of consecutive valid samples
    edges = np.diff(np.concatenate([[0], ok.astype(np.int8), [0]]))
    starts, ends = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1
    k = int(np.argmax(ends - starts))
    i, j = starts[k], ends[k]

    def refine(inside, outside):
        for _ in range(bisect_steps):
            mid = 0.5 * (inside + outside)
            if valid_fn(np.array([mid]))[0]:
                inside = mid
            else:
                outside = mid
        return inside

    a = refine(phi[i], phi[i - 1] if i > 0 else lo)
    b = refine(phi[j], phi[j + 1] if j + 1 < phi.size else hi)
    return a, b


def line_image_samples(intr: CameraIntrinsics, point, direction, n: int = 50, margin: float = 1e-3):
    """Pixel samples of the image of the 3D line ``point + s * direction``.

    The viewing directions of the line's points sweep half a great circle
    from ``+direction`` to ``-direction``. Samples are spaced uniformly in
    angle over the visible part of that arc, shrunk at both ends by
    ``margin`` times its length.

    Returns:
        ``(n, 2)`` pixel array.

    Raises:
        DegenerateInput: if the line passes through the camera center.
        DomainError: if no point of the line is projectable.
    """
    if n < 5:
        raise ParameterError("need at least 5 samples")
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    perp = p - (p @ d) * d
    dist = np.linalg.norm(perp)
    if dist < 1e-12 * max(1.0, np.linalg.norm(p)):
        raise DegenerateInput("line passes through the camera center")
    e1 = perp / dist

    def rays(phi):
        phi = np.asarray(phi, dtype=float)[..., None]
        return np.cos(phi) * d + np.sin(phi) * e1

    span = _valid_interval(lambda phi: intr.model.contains(rays(phi)), 0.0, math.pi)
    if span is None:
        raise DomainError(f"no point of the line is visible to the {intr.model.kind} model")
    a, b = span
    pad = margin * (b - a)
    px, ok = project_points(intr, rays(np.linspace(a + pad, b - pad, n)))
    if not np.all(ok):
        raise DomainError("visible arc of the line could not be sampled")
    return px


def _plane_basis(normal):
    nrm = np.asarray(normal, dtype=float)
    length = np.linalg.norm(nrm)
    if nrm.shape != (3,) or not (np.isfinite(length) and length > 0):
        raise ParameterError("plane normal must be a nonzero 3-vector")
    nrm = nrm / length
    helper = np.eye(3)[int(np.argmin(np.abs(nrm)))]
    e1 = np.cross(nrm, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(nrm, e1)


def horizon_samples(intr: CameraIntrinsics, plane_normal, n: int = 64):
    """Images of ``n`` evenly spaced directions orthogonal to ``plane_normal``.

    Directions outside the model's domain are dropped.

    Returns:
        (pixels, directions) for the kept samples.

    Raises:
        DomainError: if no horizon direction is projectable.
    """
    if n < 3:
        raise ParameterError("need at least 3 samples")
    e1, e2 = _plane_basis(plane_normal)
    psi = 2.0 * math.pi * np.arange(n) / n
    dirs = np.cos(psi)[:, None] * e1 + np.sin(psi)[:, None] * e2
    px, ok = project_points(intr, dirs)
    if not np.any(ok):
        raise DomainError(f"the horizon is not visible to the {intr.model.kind} model")
    return px[ok], dirs[ok]


@dataclass(frozen=True)
class CircleFit:
    center: np.ndarray
    radius: float
    max_residual: float

    @property
    def relative_residual(self) -> float:
        return self.max_residual / self.radius


def fit_circle(points) -> CircleFit:
    """Algebraic least-squares circle through 2-D points.

    Solves ``x^2 + y^2 + D x + E y + F = 0`` after centering and scaling the
    data; ``max_residual`` is the largest ``| |p - c| - r |``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ShapeError("need an (N, 2) array with N >= 3")
    mean = pts.mean(axis=0)
    scale = np.sqrt(np.mean(np.sum((pts - mean) ** 2, axis=1)))
    q = (pts - mean) / scale
    spread = np.linalg.svd(q, compute_uv=False)
    if spread[1] <= 1e-12 * spread[0]:
        raise DegenerateInput("points are collinear")
    A = np.column_stack([q, np.ones(len(q))])
    b = -np.sum(q * q, axis=1)
    (D, E, F), *_ = np.linalg.lstsq(A, b, rcond=None)
    c = np.array([-D / 2, -E / 2])
    r2 = c @ c - F
    if not r2 > 0:
        raise DegenerateInput("points do not determine a circle")
    center = mean + scale * c
    radius = scale * math.sqrt(r2)
    resid = np.abs(np.linalg.norm(pts - center, axis=1) - radius)
    return CircleFit(center, radius, float(resid.max()))


@dataclass(frozen=True)
class ConicFit:
    # (a, b, c, d, e, f) of a x^2 + b xy + c y^2 + d x + e y + f, on the normalized data
    coefficients: np.ndarray
    mean: np.ndarray
    scale: float
    max_residual: float


def fit_conic(points) -> ConicFit:
    """Total least-squares conic through 2-D points.

    The smallest right singular vector of the design matrix on normalized
    data is taken as the conic. ``max_residual`` is the largest first-order
    (Sampson) distance in input units.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 5:
        raise ShapeError("need an (N, 2) array with N >= 5")
    mean = pts.mean(axis=0)
    scale = np.sqrt(np.mean(np.sum((pts - mean) ** 2, axis=1)))
    x, y = ((pts - mean) / scale).T
    design = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    _, _, vt = np.linalg.svd(design)
    a, b, c, d, e, f = vt[-1]
    value = design @ vt[-1]
    gx = 2 * a * x + b * y + d
    gy = b * x + 2 * c * y + e
    grad = np.hypot(gx, gy)
    dist = np.abs(value) / np.where(grad > 0, grad, np.inf)
    return ConicFit(vt[-1], mean, float(scale), float(dist.max() * scale))
