"""Remap tables from a fisheye camera to virtual rectified viewports.

Pixel coordinates refer to pixel centers: pixel ``(i, j)`` (row, column) sits
at ``(x, y) = (j, i)``. Viewport principal points are at the raster center.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics
from .errors import ParameterError, ShapeError

RECTILINEAR = "rectilinear"
CYLINDRICAL = "cylindrical"
CUBE3 = "cube3"
VIEWPORT_KINDS = (RECTILINEAR, CYLINDRICAL, CUBE3)

# Samples up to this far outside the source raster are clamped onto it.
BORDER_CLAMP = 0.5


def _yaw(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


# Left, middle and right faces of the open cube, as rotations about the camera Y axis.
CUBE_FACE_ROTATIONS = (_yaw(-0.5 * math.pi), np.eye(3), _yaw(0.5 * math.pi))


@dataclass(frozen=True)
class ViewportSpec:
    """Virtual output camera.

    Attributes:
        kind: ``"rectilinear"``, ``"cylindrical"`` or ``"cube3"``.
        out_width, out_height: Output raster size. Cube3 needs a width divisible by 3.
        focal: Output focal length in pixels.
        rotation: Orientation of the virtual camera; fisheye rays are
            ``rotation.T @ viewport_ray``.
    """

    kind: str
    out_width: int
    out_height: int
    focal: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        if self.kind not in VIEWPORT_KINDS:
            raise ParameterError(f"viewport kind must be one of {VIEWPORT_KINDS}, got {self.kind!r}")
        if self.out_width <= 0 or self.out_height <= 0:
            raise ParameterError("output size must be positive")
        if self.kind == CUBE3 and self.out_width % 3:
            raise ParameterError("cube3 output width must be divisible by 3")
        if not (math.isfinite(self.focal) and self.focal > 0):
            raise ParameterError(f"focal must be positive, got {self.focal}")
        R = np.asarray(self.rotation, dtype=float)
        if R.shape != (3, 3) or np.max(np.abs(R.T @ R - np.eye(3))) > 1e-10:
            raise ParameterError("rotation must be an orthonormal 3x3 matrix")
        object.__setattr__(self, "rotation", R)

    @property
    def face_width(self) -> int:
        return self.out_width // 3 if self.kind == CUBE3 else self.out_width

    @property
    def principal_point(self) -> tuple[float, float]:
        """Principal point of the viewport (of each face, in face-local columns, for cube3)."""
        return 0.5 * (self.face_width - 1), 0.5 * (self.out_height - 1)


def viewport_unproject(spec: ViewportSpec, p):
    """Unit rays in the virtual camera frame for output pixel(s) ``p`` ``(..., 2)``."""
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    cx, cy = spec.principal_point
    if spec.kind == RECTILINEAR:
        v = np.stack([(x - cx) / spec.focal, (y - cy) / spec.focal, np.ones_like(x)], axis=-1)
    elif spec.kind == CYLINDRICAL:
        phi = (x - cx) / spec.focal
        v = np.stack([np.sin(phi), (y - cy) / spec.focal, np.cos(phi)], axis=-1)
    else:
        fw = spec.face_width
        face = np.clip(np.floor(x / fw), 0, 2).astype(int)
        local = np.stack([(x - face * fw - cx) / spec.focal, (y - cy) / spec.focal, np.ones_like(x)], axis=-1)
        rots = np.stack(CUBE_FACE_ROTATIONS)[face]
        v = np.einsum("...ij,...j->...i", rots, local)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def viewport_project(spec: ViewportSpec, v):
    """Output pixel coordinates of virtual-frame ray(s) ``v``; inverse of :func:`viewport_unproject`.

    Rays the viewport cannot show (behind a planar face) give NaN. For cube3
    the face whose axis is closest to the ray is used.
    """
    v = np.asarray(v, dtype=float)
    cx, cy = spec.principal_point
    f = spec.focal
    with np.errstate(all="ignore"):
        if spec.kind == CYLINDRICAL:
            horiz = np.hypot(v[..., 0], v[..., 2])
            return np.stack([cx + f * np.arctan2(v[..., 0], v[..., 2]), cy + f * v[..., 1] / horiz], axis=-1)
        if spec.kind == RECTILINEAR:
            z = np.where(v[..., 2] > 0, v[..., 2], np.nan)
            return np.stack([cx + f * v[..., 0] / z, cy + f * v[..., 1] / z], axis=-1)
        rots = np.stack(CUBE_FACE_ROTATIONS)
        local = np.einsum("kji,...j->...ki", rots, v)  # R_k^T v for each face
        face = np.argmax(local[..., 2], axis=-1)
        lv = np.take_along_axis(local, face[..., None, None], axis=-2)[..., 0, :]
        z = np.where(lv[..., 2] > 0, lv[..., 2], np.nan)
        x = face * spec.face_width + cx + f * lv[..., 0] / z
        return np.stack([x, cy + f * lv[..., 1] / z], axis=-1)


@dataclass
class RemapTable:
    """Source sample position for every output pixel.

    ``src_x``/``src_y`` have shape ``(out_height, out_width)``. Invalid pixels
    hold -1.
    """

    src_x: np.ndarray
    src_y: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.src_x = np.asarray(self.src_x, dtype=float)
        self.src_y = np.asarray(self.src_y, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        if not (self.src_x.shape == self.src_y.shape == self.valid.shape) or self.src_x.ndim != 2:
            raise ShapeError("remap arrays must be 2-D with equal shapes")

    @property
    def out_width(self) -> int:
        return self.src_x.shape[1]

    @property
    def out_height(self) -> int:
        return self.src_x.shape[0]


def build_remap(intr: CameraIntrinsics, spec: ViewportSpec) -> RemapTable:
    """Back-project every output pixel into the fisheye image.

    A pixel is valid when its ray is projectable by the fisheye model and the
    source position lies inside the image, allowing up to half a pixel of
    overhang which is clamped onto the border.
    """
    ys, xs = np.mgrid[0 : spec.out_height, 0 : spec.out_width].astype(float)
    rays = viewport_unproject(spec, np.stack([xs, ys], axis=-1)) @ spec.rotation
    model = intr.model
    ok = model.contains(rays)
    with np.errstate(all="ignore"):
        src = intr.plane_to_pixels(model.project_plane(rays))
    sx, sy = src[..., 0], src[..., 1]
    w, h = intr.width, intr.height
    lo = -BORDER_CLAMP
    inside = (sx >= lo) & (sx <= w - 1 + BORDER_CLAMP) & (sy >= lo) & (sy <= h - 1 + BORDER_CLAMP)
    valid = ok & inside & np.isfinite(sx) & np.isfinite(sy)
    sx = np.where(valid, np.clip(sx, 0, w - 1), -1.0)
    sy = np.where(valid, np.clip(sy, 0, h - 1), -1.0)
    return RemapTable(sx, sy, valid)


def warp(image, table: RemapTable, fill=0, source_size=None):
    """Bilinear resampling of ``image`` through ``table``.

    ``image`` is ``(H, W)`` or ``(H, W, C)`` uint8. Invalid output pixels get
    ``fill``. Pass ``source_size=(width, height)`` of the intrinsics used to
    build the table to have the dimensions checked.

    Raises:
        ShapeError: if the image size differs from ``source_size`` or the
            table samples outside the image.
    """
    img = np.asarray(image)
    if img.ndim not in (2, 3):
        raise ShapeError(f"image must be 2-D or 3-D, got shape {img.shape}")
    h, w = img.shape[:2]
    if source_size is not None and tuple(source_size) != (w, h):
        raise ShapeError(f"image is {w}x{h} but the remap table was built for {source_size[0]}x{source_size[1]}")
    valid = table.valid
    sx = np.where(valid, table.src_x, 0.0)
    sy = np.where(valid, table.src_y, 0.0)
    if np.any(sx > w - 1) or np.any(sy > h - 1):
        raise ShapeError("remap table samples outside the image")

    x0 = np.floor(sx).astype(int)
    y0 = np.floor(sy).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    ax = sx - x0
    ay = sy - y0
    data = img.astype(float)
    if img.ndim == 3:
        ax, ay = ax[..., None], ay[..., None]
    top = data[y0, x0] * (1 - ax) + data[y0, x1] * ax
    bottom = data[y1, x0] * (1 - ax) + data[y1, x1] * ax
    out = top * (1 - ay) + bottom * ay

    if np.issubdtype(img.dtype, np.integer):
        info = np.iinfo(img.dtype)
        out = np.clip(np.rint(out), info.min, info.max)
    out = out.astype(img.dtype)
    mask = valid if img.ndim == 2 else valid[..., None]
    return np.where(mask, out, np.asarray(fill, dtype=img.dtype))


FRMP_MAGIC = b"FRMP"
FRMP_VERSION = 1
_FRMP_HEADER = struct.Struct("<4sIII")
_FRMP_RECORD = np.dtype([("x", "<f4"), ("y", "<f4"), ("valid", "u1")])


def write_remap(path, table: RemapTable) -> None:
    """Write ``table`` as a little-endian FRMP file with packed 9-byte records."""
    records = np.empty(table.src_x.shape, dtype=_FRMP_RECORD)
    records["x"] = table.src_x
    records["y"] = table.src_y
    records["valid"] = table.valid
    with open(path, "wb") as fh:
        fh.write(_FRMP_HEADER.pack(FRMP_MAGIC, FRMP_VERSION, table.out_width, table.out_height))
        fh.write(records.tobytes())


def read_remap(path) -> RemapTable:
    """Read an FRMP file written by :func:`write_remap`.

    Raises:
        ShapeError: on a bad magic, unknown version or truncated payload.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _FRMP_HEADER.size:
        raise ShapeError("file too short for an FRMP header")
    magic, version, width, height = _FRMP_HEADER.unpack_from(blob)
    if magic != FRMP_MAGIC:
        raise ShapeError(f"bad FRMP magic {magic!r}")
    if version != FRMP_VERSION:
        raise ShapeError(f"unsupported FRMP version {version}")
    expected = width * height * _FRMP_RECORD.itemsize
    payload = blob[_FRMP_HEADER.size :]
    if len(payload) != expected:
        raise ShapeError(f"FRMP payload has {len(payload)} bytes, expected {expected}")
    records = np.frombuffer(payload, dtype=_FRMP_RECORD).reshape(height, width)
    return RemapTable(records["x"].astype(float), records["y"].astype(float), records["valid"] != 0)
