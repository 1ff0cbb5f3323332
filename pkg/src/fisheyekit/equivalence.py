"""Parameter conversions between equivalent models and their numerical check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .models import (
    CameraModel,
    Division,
    DoubleSphere,
    ExtendedEquidistant,
    ExtendedOrthographic,
    FieldOfView,
    GeneralPerspective,
    OnImagePolynomial,
    Stereographic,
    UCM,
)

# Omega values of the four reference field-of-view cameras.
TABLE1_OMEGAS = (0.93, 0.92, 0.95, 0.90)

DEFAULT_GRID_SIZE = 1000
DOMAIN_FRACTION = 0.99

_ONIMAGE_NATIVE = (Division, FieldOfView, ExtendedOrthographic, ExtendedEquidistant, OnImagePolynomial)


@dataclass(frozen=True)
class EquivalenceReport:
    model_a: CameraModel
    model_b: CameraModel
    mode: str
    grid_size: int
    grid_max: float
    max_abs_error: float

    @property
    def theta_max_tested(self) -> float:
        """Largest field angle covered by the grid (projection mode only)."""
        if self.mode == "projection":
            return self.grid_max
        return float(self.model_a.radial_inv(self.grid_max))


def fov_to_equidistant(omega: float) -> tuple[float, float]:
    """Pinhole and equidistant focal lengths reproducing a field-of-view on-image map.

    ``f_p * tan(r / f_e)`` equals ``tan(omega * r) / (2 tan(omega / 2))``.
    """
    if not (math.isfinite(omega) and 0 < omega < math.pi):
        raise DomainError(f"omega must lie in (0, pi), got {omega}")
    return 1.0 / (2.0 * math.tan(0.5 * omega)), 1.0 / omega


def equidistant_composite(f_p: float, f_e: float) -> ExtendedEquidistant:
    """Equidistant model of focal ``f_e`` whose on-image map targets a pinhole of focal ``f_p``."""
    return ExtendedEquidistant(f=f_e, lam=f_p - f_e)


def stereographic_to_division(f: float) -> Division:
    if not (math.isfinite(f) and f > 0):
        raise ParameterError(f"f must be positive, got {f}")
    return Division(a=1.0 / (4.0 * f * f), f=f)


def division_to_stereographic(a: float) -> Stereographic:
    if not (math.isfinite(a) and a > 0):
        raise ParameterError(f"a must be positive for a stereographic equivalent, got {a}")
    return Stereographic(f=0.5 / math.sqrt(a))


def general_perspective_to_ucm(f_p: float, f_s: float, d: float) -> UCM:
    return GeneralPerspective(f_p=f_p, f_s=f_s, d=d).to_ucm()


def ucm_to_general_perspective(alpha: float, f: float, f_s: float = 1.0) -> GeneralPerspective:
    """Inverse of :func:`general_perspective_to_ucm` with the sphere radius fixed to ``f_s``."""
    ucm = UCM(alpha=alpha, f=f)
    xi = ucm.alpha / (1.0 - ucm.alpha)
    return GeneralPerspective(f_p=ucm.f * (1.0 + xi), f_s=f_s, d=xi * f_s)


def double_sphere_to_ucm(model: DoubleSphere) -> UCM:
    """Only defined for ``xi == 0``, where the two models coincide."""
    if model.xi != 0:
        raise ParameterError("a double-sphere model matches a UCM only when xi == 0")
    return UCM(alpha=model.alpha, f=model.f)


def _default_mode(a, b):
    return "onimage" if isinstance(a, _ONIMAGE_NATIVE) or isinstance(b, _ONIMAGE_NATIVE) else "projection"


def _shared_limit(a, b, mode):
    if mode == "projection":
        return min(a.theta_max(), b.theta_max())
    return min(a.onimage_radius_max(), b.onimage_radius_max())


def verify_equivalence(model_a, model_b, grid=None, mode=None, grid_size=DEFAULT_GRID_SIZE):
    """Maximum absolute disagreement of two models over a grid.

    In ``"projection"`` mode the grid holds field angles and the radial
    functions are compared. In ``"onimage"`` mode the grid holds distorted radii
    and the undistorted radii are compared. The default mode is on-image
    whenever either model is natively an on-image map.

    When ``grid`` is omitted a uniform ``grid_size``-point grid spanning 99% of
    the shared domain is used.

    Raises:
        DomainError: if the grid leaves either model's domain.
    """
    mode = mode or _default_mode(model_a, model_b)
    if mode not in ("projection", "onimage"):
        raise ValueError(f"mode must be 'projection' or 'onimage', got {mode!r}")
    limit = _shared_limit(model_a, model_b, mode)
    if grid is None:
        if not math.isfinite(limit):
            raise DomainError("shared domain is unbounded; pass an explicit grid")
        grid = np.linspace(0.0, DOMAIN_FRACTION * limit, grid_size)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ValueError("grid needs at least two points")
    if np.any(grid < 0) or np.any(grid >= limit):
        raise DomainError(f"grid leaves the shared {mode} domain [0, {limit:.6g})")

    if mode == "projection":
        va, vb = model_a.radial(grid), model_b.radial(grid)
    else:
        va, vb = model_a.onimage_undistort(grid), model_b.onimage_undistort(grid)
    err = float(np.max(np.abs(va - vb)))
    return EquivalenceReport(model_a, model_b, mode, int(grid.size), float(grid.max()), err)


def verify_projection_pointwise(model_a, model_b, rays) -> float:
    """Maximum image-plane distance between two models' projections of ``rays``."""
    rays = np.asarray(rays, dtype=float)
    ok = model_a.contains(rays) & model_b.contains(rays)
    if not np.all(ok):
        raise DomainError("rays outside the shared projection domain")
    diff = model_a.project_plane(rays) - model_b.project_plane(rays)
    return float(np.max(np.hypot(diff[..., 0], diff[..., 1])))


@dataclass(frozen=True)
class Table1Row:
    omega: float
    f_p: float
    f_e: float
    max_abs_error: float


def table1(grid_size: int = DEFAULT_GRID_SIZE) -> list[Table1Row]:
    """Field-of-view parameters, their equidistant equivalents, and the on-image error."""
    rows = []
    for omega in TABLE1_OMEGAS:
        f_p, f_e = fov_to_equidistant(omega)
        report = verify_equivalence(
            FieldOfView(omega=omega, f=1.0), equidistant_composite(f_p, f_e),
            mode="onimage", grid_size=grid_size,
        )
        rows.append(Table1Row(omega, f_p, f_e, report.max_abs_error))
    return rows
