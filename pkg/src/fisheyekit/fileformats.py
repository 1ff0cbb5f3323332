"""Text and JSON file formats used by the command-line tool.

Camera files are JSON objects with exactly the keys ``model``, ``params``,
``cx``, ``cy``, ``pixel_scale``, ``width`` and ``height``. Correspondence files
hold ``view_id wx wy wz u v`` per line; pairs files hold ``u1 v1 u2 v2``.
Blank lines and ``#`` comments are ignored in both text formats.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .calibration import CorrespondenceSet
from .camera import CameraIntrinsics
from .epipolar import RelativePose
from .errors import FisheyeError, FormatError
from .models import model_from_params

CAMERA_KEYS = ("model", "params", "cx", "cy", "pixel_scale", "width", "height")
POSE_KEYS = ("rotation", "translation")
# parameters a camera file may leave at the model default
OPTIONAL_PARAMS = ("theta_max",)


def _reject_constant(name):
    raise FormatError(f"non-finite number {name} is not allowed")


def _load_json(text, what):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: invalid JSON ({exc})") from None


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise FormatError(f"{name} must be finite")
    return float(value)


def _integer(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{name} must be an integer, got {value!r}")
    return value


def _check_keys(doc, expected, what):
    if not isinstance(doc, dict):
        raise FormatError(f"{what} must be a JSON object")
    unknown = sorted(set(doc) - set(expected))
    if unknown:
        raise FormatError(f"{what}: unknown keys {unknown}")
    missing = [k for k in expected if k not in doc]
    if missing:
        raise FormatError(f"{what}: missing keys {missing}")


def camera_from_dict(doc) -> CameraIntrinsics:
    _check_keys(doc, CAMERA_KEYS, "camera file")
    if not isinstance(doc["model"], str):
        raise FormatError("model must be a string")
    if not isinstance(doc["params"], dict):
        raise FormatError("params must be an object")
    params = {k: _number(v, f"params.{k}") for k, v in doc["params"].items()}
    try:
        model = model_from_params(doc["model"], params)
        missing = [k for k in model.params() if k not in params and k not in OPTIONAL_PARAMS]
        if missing:
            raise FormatError(f"camera file: missing parameters {missing} for model {model.kind!r}")
        return CameraIntrinsics(
            model,
            _number(doc["cx"], "cx"),
            _number(doc["cy"], "cy"),
            _number(doc["pixel_scale"], "pixel_scale"),
            _integer(doc["width"], "width"),
            _integer(doc["height"], "height"),
        )
    except FormatError:
        raise
    except FisheyeError as exc:
        raise FormatError(f"camera file: {exc}") from None


def camera_to_dict(intr: CameraIntrinsics) -> dict:
    return {
        "model": intr.model.kind,
        "params": intr.model.params(),
        "cx": float(intr.cx),
        "cy": float(intr.cy),
        "pixel_scale": float(intr.pixel_scale),
        "width": int(intr.width),
        "height": int(intr.height),
    }


def loads_camera(text: str) -> CameraIntrinsics:
    return camera_from_dict(_load_json(text, "camera file"))


def dumps_camera(intr: CameraIntrinsics) -> str:
    return json.dumps(camera_to_dict(intr), indent=2) + "\n"


def read_camera(path) -> CameraIntrinsics:
    with open(path, encoding="utf-8") as fh:
        return loads_camera(fh.read())


def write_camera(path, intr: CameraIntrinsics) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_camera(intr))


def _numeric_rows(lines, n_fields, what):
    """Parse whitespace-separated rows of ``n_fields`` numbers; returns (line_numbers, rows)."""
    numbers, rows = [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != n_fields:
            raise FormatError(f"{what} line {lineno}: expected {n_fields} fields, got {len(parts)}")
        try:
            row = [float(p) for p in parts]
        except ValueError:
            raise FormatError(f"{what} line {lineno}: not a number") from None
        if not all(math.isfinite(v) for v in row):
            raise FormatError(f"{what} line {lineno}: non-finite value")
        numbers.append(lineno)
        rows.append(row)
    return numbers, np.array(rows, dtype=float).reshape(-1, n_fields)


def parse_correspondences(text: str) -> CorrespondenceSet:
    """Parse ``view_id wx wy wz u v`` lines into a :class:`CorrespondenceSet`."""
    linenos, rows = _numeric_rows(text.splitlines(), 6, "correspondence file")
    if len(rows) == 0:
        raise FormatError("correspondence file has no data lines")
    ids = rows[:, 0]
    bad = (ids != np.round(ids)) | (ids < 0)
    if np.any(bad):
        raise FormatError(f"correspondence file line {linenos[int(np.argmax(bad))]}: view_id must be a non-negative integer")
    try:
        return CorrespondenceSet(rows[:, 1:4], rows[:, 4:6], ids.astype(int))
    except FisheyeError as exc:
        raise FormatError(f"correspondence file: {exc}") from None


def format_correspondences(data: CorrespondenceSet) -> str:
    """Inverse of :func:`parse_correspondences`; numbers are written in shortest exact decimal form."""
    lines = ["# view_id wx wy wz u v"]
    for w, p, v in zip(data.world, data.pixels, data.view_ids):
        fields = [np.format_float_positional(x, unique=True, trim="-") for x in (*w, *p)]
        lines.append(" ".join([str(v), *fields]))
    return "\n".join(lines) + "\n"


def read_correspondences(path) -> CorrespondenceSet:
    with open(path, encoding="utf-8") as fh:
        return parse_correspondences(fh.read())


def parse_pairs(text: str) -> np.ndarray:
    """Parse ``u1 v1 u2 v2`` lines into an ``(N, 4)`` array; at least one pair is required."""
    _, rows = _numeric_rows(text.splitlines(), 4, "pairs file")
    if len(rows) == 0:
        raise FormatError("pairs file has no data lines")
    return rows


def read_pairs(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_pairs(fh.read())


def pose_from_dict(doc) -> RelativePose:
    """Relative pose ``X2 = R X1 + t``; the translation is rescaled to unit length."""
    _check_keys(doc, POSE_KEYS, "pose file")
    R = np.asarray(doc["rotation"], dtype=object)
    t = np.asarray(doc["translation"], dtype=object)
    if R.shape != (3, 3) or t.shape != (3,):
        raise FormatError("pose file: rotation must be 3x3 and translation length 3")
    R = np.array([[_number(v, "rotation") for v in row] for row in R])
    t = np.array([_number(v, "translation") for v in t])
    try:
        return RelativePose.normalized(R, t)
    except FisheyeError as exc:
        raise FormatError(f"pose file: {exc}") from None


def pose_to_dict(pose: RelativePose) -> dict:
    return {"rotation": pose.rotation.tolist(), "translation": pose.translation.tolist()}


def read_pose(path) -> RelativePose:
    with open(path, encoding="utf-8") as fh:
        return pose_from_dict(_load_json(fh.read(), "pose file"))
