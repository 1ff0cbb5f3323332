"""Regenerate the bundled example data in ``data/``.

Usage:
    python scripts/make_example_data.py [OUTDIR]

Everything is seeded, so repeated runs produce byte-identical files.
"""

import json
import sys
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from fisheyekit.calibration import GridSpec, default_poses, generate_synthetic
from fisheyekit.camera import CameraIntrinsics, project
from fisheyekit.fileformats import dumps_camera, format_correspondences
from fisheyekit.models import Equidistant

# Generator values for the bundled calibration set.
EQUIDISTANT_F = 1.075
WIDTH, HEIGHT = 1280, 966
PIXEL_SCALE = 300.0

N_PAIRS = 100
PAIR_NOISE_RAD = 1e-3
SEED = 20240601


def camera() -> CameraIntrinsics:
    return CameraIntrinsics(Equidistant(EQUIDISTANT_F), 0.5 * (WIDTH - 1), 0.5 * (HEIGHT - 1),
                            PIXEL_SCALE, WIDTH, HEIGHT)


def stereo_pose():
    """Camera 2 sits one unit to the right, slightly forward, and yawed by 5 degrees."""
    R = Rotation.from_euler("YXZ", [5.0, -2.0, 1.0], degrees=True).as_matrix()
    center2 = np.array([1.0, 0.05, 0.1])
    center2 /= np.linalg.norm(center2)
    return R, -R @ center2


def _perturb(rays, sigma, rng):
    """Rotate each ray by an isotropic tangent-plane offset with per-axis std ``sigma``."""
    helper = np.where(np.abs(rays[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    e1 = np.cross(rays, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(rays, e1)
    step = rng.normal(0.0, sigma, size=(len(rays), 2))
    out = rays + step[:, :1] * e1 + step[:, 1:] * e2
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def stereo_pairs(intr, R, t, noise=0.0, seed=SEED):
    """Pixel pairs of random scene points seen by both cameras within 1.2 rad of their axes."""
    rng = np.random.default_rng(seed)
    X1 = []
    while len(X1) < N_PAIRS:
        X = rng.uniform([-4.0, -3.0, 1.0], [4.0, 3.0, 8.0])
        X2 = R @ X + t
        angles = [np.arctan2(np.hypot(p[0], p[1]), p[2]) for p in (X, X2)]
        if max(angles) < 1.2:
            X1.append(X)
    X1 = np.array(X1)
    X2 = X1 @ R.T + t
    s1 = X1 / np.linalg.norm(X1, axis=1, keepdims=True)
    s2 = X2 / np.linalg.norm(X2, axis=1, keepdims=True)
    if noise > 0:
        s1, s2 = _perturb(s1, noise, rng), _perturb(s2, noise, rng)
    return np.hstack([project(intr, s1), project(intr, s2)])


def _format_pairs(pairs):
    lines = ["# u1 v1 u2 v2"]
    for row in pairs:
        lines.append(" ".join(np.format_float_positional(v, unique=True, trim="-") for v in row))
    return "\n".join(lines) + "\n"


def main(outdir="data"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    intr = camera()
    (out / "equidistant_camera.json").write_text(dumps_camera(intr))

    data = generate_synthetic(intr, default_poses(), GridSpec())
    (out / "equidistant_correspondences.txt").write_text(format_correspondences(data))

    R, t = stereo_pose()
    (out / "stereo_pose.json").write_text(
        json.dumps({"rotation": R.tolist(), "translation": t.tolist()}, indent=2) + "\n"
    )
    (out / "stereo_pairs.txt").write_text(_format_pairs(stereo_pairs(intr, R, t)))
    (out / "stereo_pairs_noisy.txt").write_text(_format_pairs(stereo_pairs(intr, R, t, PAIR_NOISE_RAD)))


if __name__ == "__main__":
    main(*sys.argv[1:])
