"""Radially symmetric fisheye projection models.

Every model maps a 3D point in the camera frame to a point on the normalized
image plane (``project_plane``) and lifts image-plane points back to unit rays
(``unproject_plane``). The mapping is characterised by its radial function
``r = radial(theta)``, the image-plane distance from the distortion center at
which a ray with field angle ``theta`` lands.

Methods on the model classes do raw vectorized math without domain checks;
the checked entry points live in :mod:`fisheyekit.camera`.

Models that are natively defined as on-image maps (division, field-of-view,
the extended models, PFET) also expose ``onimage_undistort`` and
``onimage_distort``: radial warps between the distorted image and a pinhole
image with focal length ``onimage_focal``. Every other model gets these maps
by composing its radial function with that pinhole.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import ClassVar, Mapping

import numpy as np

from ._numeric import invert_increasing, polyder_increasing, polyval_increasing
from .errors import ParameterError

HALF_PI = 0.5 * math.pi
MONOTONE_SAMPLES = 1000


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")


def _check_finite(name, value):
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")


def _field_angle(X):
    X = np.asarray(X, dtype=float)
    return np.arctan2(np.hypot(X[..., 0], X[..., 1]), X[..., 2])


def _scale_xy(xy, scale):
    return np.stack([scale * xy[..., 0], scale * xy[..., 1]], axis=-1)


def _normalize(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class CameraModel:
    """Base class for all projection models.

    Subclasses are frozen dataclasses whose fields are the model parameters.
    A subclass overrides at least one of ``radial``/``project_plane`` and one
    of ``radial_inv``/``unproject_plane``; the defaults derive each from the
    other.
    """

    kind: ClassVar[str] = ""
    # True when unprojection is closed form, False when it goes through
    # numeric radial inversion.
    analytic: ClassVar[bool] = True
    # JSON parameter name -> dataclass field name, where they differ.
    _aliases: ClassVar[dict] = {}
    # Parameters that do not affect the projection (fixed during calibration).
    gauge_params: ClassVar[tuple] = ()

    # -- parameters -------------------------------------------------------

    def params(self) -> dict[str, float]:
        """Parameters as an ordered ``{json_name: value}`` mapping."""
        rev = {v: k for k, v in self._aliases.items()}
        return {rev.get(f.name, f.name): float(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_params(cls, params: Mapping[str, float]):
        fields = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in params.items():
            name = cls._aliases.get(key, key)
            if name not in fields:
                raise ParameterError(f"unknown parameter {key!r} for model {cls.kind!r}")
            kwargs[name] = float(value)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ParameterError(f"bad parameters for model {cls.kind!r}: {exc}") from None

    def with_params(self, **updates):
        return type(self).from_params({**self.params(), **updates})

    # -- domains ----------------------------------------------------------

    def theta_max(self) -> float:
        raise NotImplementedError

    def image_radius_max(self) -> float:
        """Largest attainable image-plane radius; ``inf`` when unbounded."""
        raise NotImplementedError

    def contains(self, X):
        """Elementwise membership of camera-frame points in the projectable set."""
        X = np.asarray(X, dtype=float)
        nonzero = np.any(X != 0, axis=-1)
        return nonzero & (_field_angle(X) < self.theta_max())

    def image_contains(self, uv):
        uv = np.asarray(uv, dtype=float)
        return np.hypot(uv[..., 0], uv[..., 1]) <= self.image_radius_max()

    # -- radial forms -----------------------------------------------------

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        pts = np.stack([np.sin(theta), np.zeros_like(theta), np.cos(theta)], axis=-1)
        return self.project_plane(pts)[..., 0]

    def radial_inv(self, r):
        r = np.asarray(r, dtype=float)
        ray = self.unproject_plane(np.stack([r, np.zeros_like(r)], axis=-1))
        return np.arctan2(ray[..., 0], ray[..., 2])

    # -- projection -------------------------------------------------------

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        rho = np.hypot(X[..., 0], X[..., 1])
        with np.errstate(all="ignore"):
            r = self.radial(np.arctan2(rho, X[..., 2]))
            scale = np.divide(r, rho, out=np.zeros_like(rho), where=rho > 0)
        return _scale_xy(X, scale)

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        r = np.hypot(uv[..., 0], uv[..., 1])
        with np.errstate(all="ignore"):
            theta = self.radial_inv(r)
            scale = np.divide(np.sin(theta), r, out=np.zeros_like(r), where=r > 0)
        xy = _scale_xy(uv, scale)
        return np.concatenate([xy, np.cos(theta)[..., None]], axis=-1)

    # -- on-image maps ----------------------------------------------------

    @property
    def onimage_focal(self) -> float:
        """Focal length of the pinhole image that on-image maps undistort to."""
        return self.f

    def onimage_radius_max(self) -> float:
        """Distorted radius at which the undistorted radius becomes infinite."""
        if self.theta_max() <= HALF_PI:
            return self.image_radius_max()
        return float(self.radial(HALF_PI))

    def onimage_undistort(self, r_d):
        with np.errstate(all="ignore"):
            return self.onimage_focal * np.tan(self.radial_inv(r_d))

    def onimage_distort(self, r_u):
        return self.radial(np.arctan(np.asarray(r_u, dtype=float) / self.onimage_focal))


# ---------------------------------------------------------------------------
# Classical geometric models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pinhole(CameraModel):
    f: float = 1.0

    kind: ClassVar[str] = "pinhole"

    def __post_init__(self):
        _check_positive("f", self.f)

    def theta_max(self):
        return HALF_PI

    def image_radius_max(self):
        return math.inf

    def radial(self, theta):
        return self.f * np.tan(theta)

    def radial_inv(self, r):
        return np.arctan(np.asarray(r, dtype=float) / self.f)

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        with np.errstate(all="ignore"):
            return _scale_xy(X, self.f / X[..., 2])

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        v = np.concatenate([uv, np.full(uv.shape[:-1] + (1,), self.f)], axis=-1)
        return _normalize(v)

    def onimage_undistort(self, r_d):
        return np.asarray(r_d, dtype=float) * 1.0

    def onimage_distort(self, r_u):
        return np.asarray(r_u, dtype=float) * 1.0


@dataclass(frozen=True)
class Equidistant(CameraModel):
    f: float = 1.0

    kind: ClassVar[str] = "equidistant"

    def __post_init__(self):
        _check_positive("f", self.f)

    def theta_max(self):
        return math.pi

    def image_radius_max(self):
        return self.f * math.pi

    def radial(self, theta):
        return self.f * np.asarray(theta, dtype=float)

    def radial_inv(self, r):
        return np.asarray(r, dtype=float) / self.f

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        r = np.hypot(uv[..., 0], uv[..., 1])
        theta = r / self.f
        scale = np.divide(np.sin(theta), r, out=np.zeros_like(r), where=r > 0)
        return np.concatenate([_scale_xy(uv, scale), np.cos(theta)[..., None]], axis=-1)


@dataclass(frozen=True)
class Stereographic(CameraModel):
    f: float = 1.0

    kind: ClassVar[str] = "stereographic"

    def __post_init__(self):
        _check_positive("f", self.f)

    def theta_max(self):
        return math.pi

    def image_radius_max(self):
        return math.inf

    def radial(self, theta):
        return 2.0 * self.f * np.tan(0.5 * np.asarray(theta, dtype=float))

    def radial_inv(self, r):
        return 2.0 * np.arctan(np.asarray(r, dtype=float) / (2.0 * self.f))

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        z = X[..., 2]
        d = np.linalg.norm(X, axis=-1)
        rho2 = X[..., 0] ** 2 + X[..., 1] ** 2
        with np.errstate(all="ignore"):
            # behind the camera d + z = rho^2 / (d - z) avoids cancellation
            denom = np.where(z < 0, rho2 / (d - z), d + z)
            return _scale_xy(X, 2.0 * self.f / denom)

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        r2 = uv[..., 0] ** 2 + uv[..., 1] ** 2
        four_f2 = 4.0 * self.f**2
        k = 1.0 / (four_f2 + r2)
        xy = _scale_xy(uv, 4.0 * self.f * k)
        return np.concatenate([xy, ((four_f2 - r2) * k)[..., None]], axis=-1)


@dataclass(frozen=True)
class Orthographic(CameraModel):
    f: float = 1.0

    kind: ClassVar[str] = "orthographic"

    def __post_init__(self):
        _check_positive("f", self.f)

    def theta_max(self):
        return HALF_PI

    def image_radius_max(self):
        return self.f

    def radial(self, theta):
        return self.f * np.sin(theta)

    def radial_inv(self, r):
        return np.arcsin(np.asarray(r, dtype=float) / self.f)

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        with np.errstate(all="ignore"):
            return _scale_xy(X, self.f / np.linalg.norm(X, axis=-1))

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        r2 = uv[..., 0] ** 2 + uv[..., 1] ** 2
        with np.errstate(invalid="ignore"):
            z = np.sqrt(self.f**2 - r2)
        return np.concatenate([uv / self.f, (z / self.f)[..., None]], axis=-1)


@dataclass(frozen=True)
class ExtendedOrthographic(Orthographic):
    """Orthographic projection whose undistorted plane sits ``lam`` off the sphere."""

    f: float = 1.0
    lam: float = 0.0

    kind: ClassVar[str] = "extended_orthographic"
    _aliases: ClassVar[dict] = {"lambda": "lam"}
    gauge_params: ClassVar[tuple] = ("lambda",)

    def __post_init__(self):
        _check_positive("f", self.f)
        _check_finite("lambda", self.lam)
        _check_positive("f + lambda", self.f + self.lam)

    @property
    def onimage_focal(self):
        return self.f + self.lam

    def onimage_undistort(self, r_d):
        r_d = np.asarray(r_d, dtype=float)
        with np.errstate(all="ignore"):
            return (self.lam + self.f) * r_d / np.sqrt(self.f**2 - r_d**2)

    def onimage_distort(self, r_u):
        r_u = np.asarray(r_u, dtype=float)
        return self.f * r_u / np.sqrt((self.lam + self.f) ** 2 + r_u**2)


@dataclass(frozen=True)
class ExtendedEquidistant(Equidistant):
    """Equidistant projection paired with a pinhole of focal ``f + lam``."""

    f: float = 1.0
    lam: float = 0.0

    kind: ClassVar[str] = "extended_equidistant"
    _aliases: ClassVar[dict] = {"lambda": "lam"}
    gauge_params: ClassVar[tuple] = ("lambda",)

    def __post_init__(self):
        _check_positive("f", self.f)
        _check_finite("lambda", self.lam)
        _check_positive("f + lambda", self.f + self.lam)

    def theta_max(self):
        return HALF_PI

    def image_radius_max(self):
        return self.f * HALF_PI

    @property
    def onimage_focal(self):
        return self.f + self.lam

    def onimage_undistort(self, r_d):
        with np.errstate(all="ignore"):
            return (self.f + self.lam) * np.tan(np.asarray(r_d, dtype=float) / self.f)

    def onimage_distort(self, r_u):
        return self.f * np.arctan(np.asarray(r_u, dtype=float) / (self.f + self.lam))


# ---------------------------------------------------------------------------
# Algebraic models
# ---------------------------------------------------------------------------


class _PolynomialModel(CameraModel):
    """Shared machinery for polynomial models with a caller-declared angle limit."""

    analytic: ClassVar[bool] = False
    gauge_params: ClassVar[tuple] = ("theta_max",)
    _prefix: ClassVar[str] = ""
    _max_terms: ClassVar[int] = 0

    def _validate(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not 1 <= len(coeffs) <= self._max_terms:
            raise ParameterError(f"{self.kind} takes 1..{self._max_terms} coefficients, got {len(coeffs)}")
        for c in coeffs:
            _check_finite(self._prefix, c)
        _check_positive("theta_max", self.theta_limit)
        grid = np.linspace(0.0, self.theta_limit, MONOTONE_SAMPLES)
        r = self.radial(grid)
        if not (np.all(np.isfinite(r)) and np.all(np.diff(r) > 0)):
            raise ParameterError(f"{self.kind} radial function is not strictly increasing on [0, theta_max]")

    def params(self):
        out = {f"{self._prefix}{i + 1}": c for i, c in enumerate(self.coeffs)}
        out["theta_max"] = float(self.theta_limit)
        return out

    @classmethod
    def from_params(cls, params):
        params = dict(params)
        limit = params.pop("theta_max", None)
        coeffs = []
        for i in range(1, cls._max_terms + 1):
            key = f"{cls._prefix}{i}"
            if key in params:
                coeffs.append(float(params.pop(key)))
            else:
                break
        if params:
            raise ParameterError(f"unknown parameters {sorted(params)} for model {cls.kind!r}")
        kwargs = {} if limit is None else {"theta_limit": float(limit)}
        return cls(tuple(coeffs), **kwargs)

    def theta_max(self):
        return self.theta_limit

    def image_radius_max(self):
        return float(self.radial(self.theta_limit))


@dataclass(frozen=True)
class PolynomialOdd(_PolynomialModel):
    """``r(theta) = k1*theta + k2*theta**3 + k3*theta**5 + ...`` (Kannala-Brandt style)."""

    coeffs: tuple = (1.0,)
    theta_limit: float = HALF_PI

    kind: ClassVar[str] = "polynomial_odd"
    _prefix: ClassVar[str] = "k"
    _max_terms: ClassVar[int] = 5

    def __post_init__(self):
        self._validate()

    @property
    def _powers(self):
        return tuple(2 * i + 1 for i in range(len(self.coeffs)))

    def radial(self, theta):
        return polyval_increasing(self.coeffs, self._powers, theta)

    def radial_derivative(self, theta):
        return polyder_increasing(self.coeffs, self._powers, theta)

    def radial_inv(self, r):
        r = np.asarray(r, dtype=float)
        return invert_increasing(self.radial, self.radial_derivative, r, 0.0, self.theta_limit, r / self.coeffs[0])

    @property
    def onimage_focal(self):
        return self.coeffs[0]


@dataclass(frozen=True)
class PolynomialMixed(_PolynomialModel):
    """``r(theta) = a1*theta + a2*theta**2 + a3*theta**3 + a4*theta**4`` (WoodScape style)."""

    coeffs: tuple = (1.0, 0.0, 0.0, 0.0)
    theta_limit: float = math.pi

    kind: ClassVar[str] = "polynomial_mixed"
    _prefix: ClassVar[str] = "a"
    _max_terms: ClassVar[int] = 4

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if len(coeffs) != 4:
            raise ParameterError(f"polynomial_mixed takes exactly 4 coefficients, got {len(coeffs)}")
        self._validate()

    def radial(self, theta):
        return polyval_increasing(self.coeffs, (1, 2, 3, 4), theta)

    def radial_derivative(self, theta):
        return polyder_increasing(self.coeffs, (1, 2, 3, 4), theta)

    def radial_inv(self, r):
        r = np.asarray(r, dtype=float)
        return invert_increasing(self.radial, self.radial_derivative, r, 0.0, self.theta_limit, r / self.coeffs[0])

    @property
    def onimage_focal(self):
        return self.coeffs[0]


@dataclass(frozen=True)
class OnImagePolynomial(_PolynomialModel):
    """PFET-style on-image polynomial ``r_d = c1*r_u + c2*r_u**2 + ...``.

    The undistorted radius belongs to a unit-focal pinhole, so the projection
    is ``r(theta) = P(tan(theta))`` and ``theta_limit`` must stay below pi/2.
    """

    coeffs: tuple = (1.0,)
    theta_limit: float = 1.4

    kind: ClassVar[str] = "onimage_polynomial"
    _prefix: ClassVar[str] = "c"
    _max_terms: ClassVar[int] = 8

    def __post_init__(self):
        if not self.theta_limit < HALF_PI:
            raise ParameterError("onimage_polynomial needs theta_max < pi/2")
        self._validate()

    @property
    def _powers(self):
        return tuple(range(1, len(self.coeffs) + 1))

    @property
    def onimage_focal(self):
        return 1.0

    def onimage_distort(self, r_u):
        return polyval_increasing(self.coeffs, self._powers, r_u)

    def onimage_undistort(self, r_d):
        r_d = np.asarray(r_d, dtype=float)
        hi = math.tan(self.theta_limit)
        return invert_increasing(
            self.onimage_distort,
            lambda x: polyder_increasing(self.coeffs, self._powers, x),
            r_d, 0.0, hi, r_d / self.coeffs[0],
        )

    def onimage_radius_max(self):
        return self.image_radius_max()

    def radial(self, theta):
        with np.errstate(all="ignore"):
            return self.onimage_distort(np.tan(theta))

    def radial_inv(self, r):
        return np.arctan(self.onimage_undistort(r))


@dataclass(frozen=True)
class Division(CameraModel):
    """Single-parameter division model composed with a pinhole of focal ``f``."""

    a: float = 0.25
    f: float = 1.0

    kind: ClassVar[str] = "division"

    def __post_init__(self):
        _check_finite("a", self.a)
        if self.a < 0:
            raise ParameterError(f"a must be >= 0, got {self.a}")
        _check_positive("f", self.f)

    def theta_max(self):
        return HALF_PI

    def image_radius_max(self):
        return 1.0 / math.sqrt(self.a) if self.a > 0 else math.inf

    def onimage_undistort(self, r_d):
        r_d = np.asarray(r_d, dtype=float)
        with np.errstate(all="ignore"):
            return r_d / (1.0 - self.a * r_d**2)

    def onimage_distort(self, r_u):
        # 2r/(1+sqrt(1+4ar^2)) equals (sqrt(1+4ar^2)-1)/(2ar) without the 0/0 at a=0
        r_u = np.asarray(r_u, dtype=float)
        return 2.0 * r_u / (1.0 + np.sqrt(1.0 + 4.0 * self.a * r_u**2))

    def radial(self, theta):
        with np.errstate(all="ignore"):
            return self.onimage_distort(self.f * np.tan(theta))

    def radial_inv(self, r):
        r = np.asarray(r, dtype=float)
        return np.arctan2(r, self.f * (1.0 - self.a * r**2))

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        r2 = uv[..., 0] ** 2 + uv[..., 1] ** 2
        with np.errstate(all="ignore"):
            xy = _scale_xy(uv, 1.0 / (1.0 - self.a * r2))
        v = np.concatenate([xy, np.full(r2.shape + (1,), self.f)], axis=-1)
        return _normalize(v)


# ---------------------------------------------------------------------------
# Spherical models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldOfView(CameraModel):
    omega: float = 1.0
    f: float = 1.0

    kind: ClassVar[str] = "fov"

    def __post_init__(self):
        _check_finite("omega", self.omega)
        if not 0 < self.omega < math.pi:
            raise ParameterError(f"omega must lie in (0, pi), got {self.omega}")
        _check_positive("f", self.f)

    @property
    def _two_tan(self):
        return 2.0 * math.tan(0.5 * self.omega)

    def theta_max(self):
        return math.pi

    def image_radius_max(self):
        return self.f * math.pi / self.omega

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.f * np.arctan2(self._two_tan * np.sin(theta), np.cos(theta)) / self.omega

    def radial_inv(self, r):
        w = self.omega * np.asarray(r, dtype=float) / self.f
        return np.arctan2(np.sin(w), self._two_tan * np.cos(w))

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        rho = np.hypot(X[..., 0], X[..., 1])
        r_d = np.arctan2(self._two_tan * rho, X[..., 2]) / self.omega
        scale = np.divide(self.f * r_d, rho, out=np.zeros_like(rho), where=rho > 0)
        return _scale_xy(X, scale)

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        r_d = np.hypot(uv[..., 0], uv[..., 1]) / self.f
        w = r_d * self.omega
        # sin(r w)/(2 r tan(w/2)) -> omega / (2 tan(omega/2)) as r -> 0
        limit = self.omega / self._two_tan
        k = np.divide(np.sin(w), r_d * self._two_tan, out=np.full_like(r_d, limit), where=r_d > 0)
        xy = _scale_xy(uv / self.f, k)
        return _normalize(np.concatenate([xy, np.cos(w)[..., None]], axis=-1))

    def onimage_undistort(self, r_d):
        with np.errstate(all="ignore"):
            return self.f * np.tan(self.omega * np.asarray(r_d, dtype=float) / self.f) / self._two_tan

    def onimage_distort(self, r_u):
        return self.f * np.arctan(self._two_tan * np.asarray(r_u, dtype=float) / self.f) / self.omega


def _sphere_offset_bound(alpha):
    """``w`` of the unified models: the projectable set is ``cos(theta) > -w``."""
    return alpha / (1.0 - alpha) if alpha <= 0.5 else (1.0 - alpha) / alpha


def _check_alpha(alpha):
    _check_finite("alpha", alpha)
    if not 0 <= alpha < 1:
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha}")


@dataclass(frozen=True)
class UCM(CameraModel):
    """Unified camera model in the (alpha, f) parameterization."""

    alpha: float = 0.5
    f: float = 1.0

    kind: ClassVar[str] = "ucm"

    def __post_init__(self):
        _check_alpha(self.alpha)
        _check_positive("f", self.f)

    def theta_max(self):
        return math.acos(-_sphere_offset_bound(self.alpha))

    def image_radius_max(self):
        if self.alpha <= 0.5:
            return math.inf
        return self.f / math.sqrt(2.0 * self.alpha - 1.0)

    def _denominator(self, rho, z, d):
        # a*d + (1-a)*z, rewritten for z < 0 so that d + z = rho^2 / (d - z) avoids cancellation
        a = self.alpha
        with np.errstate(all="ignore"):
            behind = a * rho * rho / (d - z) + (1.0 - 2.0 * a) * z
        return np.where(z < 0, behind, a * d + (1.0 - a) * z)

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        s, c = np.sin(theta), np.cos(theta)
        with np.errstate(all="ignore"):
            return self.f * s / self._denominator(s, c, 1.0)

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        rho = np.hypot(X[..., 0], X[..., 1])
        den = self._denominator(rho, X[..., 2], np.linalg.norm(X, axis=-1))
        with np.errstate(all="ignore"):
            return _scale_xy(X, self.f / den)

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        a, f = self.alpha, self.f
        r2 = uv[..., 0] ** 2 + uv[..., 1] ** 2
        with np.errstate(invalid="ignore"):
            k = (a * f + (1.0 - a) * np.sqrt((1.0 - 2.0 * a) * r2 + f * f)) / ((1.0 - a) ** 2 * r2 + f * f)
        z = k * f / (1.0 - a) - a / (1.0 - a)
        ray = np.concatenate([_scale_xy(uv, k), z[..., None]], axis=-1)
        return _normalize(ray)


@dataclass(frozen=True)
class EUCM(CameraModel):
    """Enhanced unified camera model: the sphere becomes an ellipsoid with coefficient beta."""

    alpha: float = 0.5
    beta: float = 1.0
    f: float = 1.0

    kind: ClassVar[str] = "eucm"
    analytic: ClassVar[bool] = False

    def __post_init__(self):
        _check_alpha(self.alpha)
        _check_positive("beta", self.beta)
        _check_positive("f", self.f)

    def theta_max(self):
        w = _sphere_offset_bound(self.alpha)
        b = self.beta
        return math.acos(-min(1.0, w * math.sqrt(b) / math.sqrt(1.0 + w * w * (b - 1.0))))

    def image_radius_max(self):
        if self.alpha <= 0.5:
            return math.inf
        return self.f / math.sqrt(self.beta * (2.0 * self.alpha - 1.0))

    def _denominator(self, s, c):
        return self.alpha * np.sqrt(self.beta * s * s + c * c) + (1.0 - self.alpha) * c

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        s, c = np.sin(theta), np.cos(theta)
        return self.f * s / self._denominator(s, c)

    def radial_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        s, c = np.sin(theta), np.cos(theta)
        root = np.sqrt(self.beta * s * s + c * c)
        den = self.alpha * root + (1.0 - self.alpha) * c
        dden = self.alpha * (self.beta - 1.0) * s * c / root - (1.0 - self.alpha) * s
        return self.f * (c * den - s * dden) / den**2

    def radial_inv(self, r):
        r = np.asarray(r, dtype=float)
        return invert_increasing(self.radial, self.radial_derivative, r, 0.0, self.theta_max(), r / self.f)

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        a = self.alpha
        d = np.sqrt(self.beta * (X[..., 0] ** 2 + X[..., 1] ** 2) + X[..., 2] ** 2)
        with np.errstate(all="ignore"):
            return _scale_xy(X, self.f / (a * d + (1.0 - a) * X[..., 2]))


@dataclass(frozen=True)
class DoubleSphere(CameraModel):
    xi: float = 0.0
    alpha: float = 0.5
    f: float = 1.0

    kind: ClassVar[str] = "double_sphere"

    def __post_init__(self):
        _check_finite("xi", self.xi)
        if self.xi < 0:
            raise ParameterError(f"xi must be >= 0, got {self.xi}")
        _check_alpha(self.alpha)
        _check_positive("f", self.f)

    def theta_max(self):
        w1 = _sphere_offset_bound(self.alpha)
        xi = self.xi
        w2 = (w1 + xi) / math.sqrt(2.0 * w1 * xi + xi * xi + 1.0)
        return math.acos(-min(1.0, w2))

    def image_radius_max(self):
        if self.alpha <= 0.5:
            return math.inf
        return self.f / math.sqrt(2.0 * self.alpha - 1.0)

    def project_plane(self, X):
        X = np.asarray(X, dtype=float)
        d1 = np.linalg.norm(X, axis=-1)
        zs = self.xi * d1 + X[..., 2]
        d2 = np.sqrt(X[..., 0] ** 2 + X[..., 1] ** 2 + zs * zs)
        with np.errstate(all="ignore"):
            return _scale_xy(X, self.f / (self.alpha * d2 + (1.0 - self.alpha) * zs))

    def unproject_plane(self, uv):
        uv = np.asarray(uv, dtype=float)
        a, xi = self.alpha, self.xi
        m = uv / self.f
        r2 = m[..., 0] ** 2 + m[..., 1] ** 2
        with np.errstate(invalid="ignore"):
            mz = (1.0 - a * a * r2) / (a * np.sqrt(1.0 - (2.0 * a - 1.0) * r2) + 1.0 - a)
            k = (mz * xi + np.sqrt(mz * mz + (1.0 - xi * xi) * r2)) / (mz * mz + r2)
        ray = np.concatenate([_scale_xy(m, k), (k * mz - xi)[..., None]], axis=-1)
        return _normalize(ray)


@dataclass(frozen=True)
class GeneralPerspective(CameraModel):
    """Projection onto a sphere of radius ``f_s`` viewed by a pinhole offset by ``d``."""

    f_p: float = 2.0
    f_s: float = 1.0
    d: float = 1.0

    kind: ClassVar[str] = "general_perspective"
    gauge_params: ClassVar[tuple] = ("f_s",)

    def __post_init__(self):
        _check_positive("f_p", self.f_p)
        _check_positive("f_s", self.f_s)
        _check_finite("d", self.d)
        if self.d < 0:
            raise ParameterError(f"d must be >= 0, got {self.d}")

    def to_ucm(self) -> UCM:
        xi = self.d / self.f_s
        return UCM(alpha=xi / (1.0 + xi), f=self.f_p / (1.0 + xi))

    def theta_max(self):
        return self.to_ucm().theta_max()

    def image_radius_max(self):
        return self.to_ucm().image_radius_max()

    @property
    def onimage_focal(self):
        return self.f_p

    # f_p / (Z + xi |X|) equals the UCM form exactly; the UCM evaluation is the stable one.
    def radial(self, theta):
        return self.to_ucm().radial(theta)

    def project_plane(self, X):
        return self.to_ucm().project_plane(X)

    def unproject_plane(self, uv):
        return self.to_ucm().unproject_plane(uv)


MODEL_CLASSES: dict[str, type[CameraModel]] = {
    cls.kind: cls
    for cls in (
        Pinhole,
        Equidistant,
        Stereographic,
        Orthographic,
        ExtendedOrthographic,
        ExtendedEquidistant,
        PolynomialOdd,
        PolynomialMixed,
        OnImagePolynomial,
        Division,
        FieldOfView,
        UCM,
        EUCM,
        DoubleSphere,
        GeneralPerspective,
    )
}


def model_from_params(kind: str, params: Mapping[str, float]) -> CameraModel:
    """Build a model from its kind string and JSON-style parameter mapping."""
    try:
        cls = MODEL_CLASSES[kind]
    except KeyError:
        raise ParameterError(f"unknown model kind {kind!r}; expected one of {sorted(MODEL_CLASSES)}") from None
    return cls.from_params(params)
