"""Camera intrinsics and the domain-checked projection operations.

Image-plane coordinates produced by the models are converted to pixels as
``pixel = (cx, cy) + pixel_scale * (u, v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DomainError, ParameterError, ShapeError
from .models import CameraModel


@dataclass(frozen=True)
class CameraIntrinsics:
    """A projection model plus the distortion center and pixel scaling.

    Attributes:
        model: Radial projection model, in normalized image-plane units.
        cx, cy: Distortion center in pixels.
        pixel_scale: Pixels per image-plane unit.
        width, height: Image size in pixels.
    """

    model: CameraModel
    cx: float
    cy: float
    pixel_scale: float = 1.0
    width: int = 1
    height: int = 1

    def __post_init__(self):
        if not isinstance(self.model, CameraModel):
            raise ParameterError(f"model must be a CameraModel, got {type(self.model).__name__}")
        if not (isinstance(self.width, (int, np.integer)) and isinstance(self.height, (int, np.integer))):
            raise ParameterError("width and height must be integers")
        if self.width <= 0 or self.height <= 0:
            raise ParameterError(f"image size must be positive, got {self.width}x{self.height}")
        if not (math.isfinite(self.pixel_scale) and self.pixel_scale > 0):
            raise ParameterError(f"pixel_scale must be positive, got {self.pixel_scale}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ParameterError(f"center ({self.cx}, {self.cy}) outside a {self.width}x{self.height} image")

    @property
    def center(self) -> np.ndarray:
        return np.array([self.cx, self.cy])

    def plane_to_pixels(self, uv):
        return self.center + self.pixel_scale * np.asarray(uv, dtype=float)

    def pixels_to_plane(self, px):
        return (np.asarray(px, dtype=float) - self.center) / self.pixel_scale

    def replace(self, **changes) -> "CameraIntrinsics":
        fields = dict(model=self.model, cx=self.cx, cy=self.cy, pixel_scale=self.pixel_scale,
                      width=self.width, height=self.height)
        fields.update(changes)
        return CameraIntrinsics(**fields)


def _as_points(X, dim, name):
    X = np.asarray(X, dtype=float)
    if X.shape[-1:] != (dim,):
        raise ShapeError(f"{name} must have trailing dimension {dim}, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} contains non-finite values")
    return X


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def project_points(intr: CameraIntrinsics, X):
    """Project camera-frame points without raising on domain violations.

    Returns:
        (pixels, valid): pixels has shape ``X.shape[:-1] + (2,)`` with NaN rows
        where ``valid`` is False.
    """
    X = np.asarray(X, dtype=float)
    valid = intr.model.contains(X) & np.all(np.isfinite(X), axis=-1)
    with np.errstate(all="ignore"):
        px = intr.plane_to_pixels(intr.model.project_plane(X))
    px = np.where(valid[..., None], px, np.nan)
    return px, valid


def project(intr: CameraIntrinsics, X):
    """Project one point ``(3,)`` or a batch ``(N, 3)`` to pixel coordinates.

    Points on the optical axis land exactly on ``(cx, cy)``.

    Raises:
        DegenerateInput: for the zero vector.
        DomainError: if any point lies outside the model's projectable set.
    """
    X = _as_points(X, 3, "X")
    if np.any(np.all(X == 0, axis=-1)):
        raise DegenerateInput("cannot project the camera center")
    px, valid = project_points(intr, X)
    if not np.all(valid):
        raise DomainError(f"{np.size(valid) - np.count_nonzero(valid)} point(s) outside the {intr.model.kind} domain")
    return px


def unproject_points(intr: CameraIntrinsics, px):
    """Lift pixels to unit rays without raising; invalid rows are NaN."""
    uv = intr.pixels_to_plane(px)
    valid = intr.model.image_contains(uv) & np.all(np.isfinite(uv), axis=-1)
    with np.errstate(all="ignore"):
        rays = intr.model.unproject_plane(np.where(valid[..., None], uv, 0.0))
    rays = np.where(valid[..., None], rays, np.nan)
    return rays, valid


def unproject(intr: CameraIntrinsics, px):
    """Lift one pixel ``(2,)`` or a batch ``(N, 2)`` to unit rays on the viewing sphere.

    Raises:
        DomainError: if any pixel lies outside the model's image domain.
    """
    px = _as_points(px, 2, "pixel")
    rays, valid = unproject_points(intr, px)
    if not np.all(valid):
        raise DomainError(f"pixel(s) outside the {intr.model.kind} image domain")
    return rays


def theta_max(model: CameraModel) -> float:
    return model.theta_max()


def domain_contains(model: CameraModel, X):
    """True where ``X`` (camera frame) is projectable by ``model``."""
    result = model.contains(np.asarray(X, dtype=float))
    return bool(result) if np.ndim(result) == 0 else result


def image_domain_contains(model: CameraModel, u):
    result = model.image_contains(np.asarray(u, dtype=float))
    return bool(result) if np.ndim(result) == 0 else result


def radial(model: CameraModel, theta):
    """Image-plane radius of rays with field angle ``theta``.

    Raises:
        DomainError: unless ``0 <= theta < theta_max(model)``.
    """
    t = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0) or np.any(t >= model.theta_max()):
        raise DomainError(f"field angle outside [0, {model.theta_max():.6g}) for {model.kind}")
    return _scalar_or_array(model.radial(t), theta)


def radial_inv(model: CameraModel, r):
    """Field angle of rays imaged at radius ``r``; the inverse of :func:`radial`."""
    rr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(rr)) or np.any(rr < 0) or np.any(rr > model.image_radius_max()):
        raise DomainError(f"radius outside [0, {model.image_radius_max():.6g}] for {model.kind}")
    return _scalar_or_array(model.radial_inv(rr), r)


def onimage_undistort(model: CameraModel, r_d):
    """Map a distorted radius to the pinhole-equivalent radius."""
    rr = np.asarray(r_d, dtype=float)
    if np.any(~np.isfinite(rr)) or np.any(rr < 0) or np.any(rr >= model.onimage_radius_max()):
        raise DomainError(f"distorted radius outside [0, {model.onimage_radius_max():.6g}) for {model.kind}")
    return _scalar_or_array(model.onimage_undistort(rr), r_d)


def onimage_distort(model: CameraModel, r_u):
    """Map a pinhole-equivalent radius back to the distorted radius."""
    rr = np.asarray(r_u, dtype=float)
    if np.any(~np.isfinite(rr)) or np.any(rr < 0):
        raise DomainError("undistorted radius must be finite and non-negative")
    return _scalar_or_array(model.onimage_distort(rr), r_u)
