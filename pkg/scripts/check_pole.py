"""Render a vertical pole in a fisheye image, rectify it cylindrically, and check it stays vertical.

Usage:
    python scripts/check_pole.py [--workdir DIR] [--supersample N]

The fisheye image is rendered by supersampled ray casting against a vertical
cylinder. It is then warped through the command-line ``rectify`` command and
the pole's intensity centroid is measured in every output row it covers.
Exits non-zero if any row centroid strays more than 0.5 px from the column
predicted by the pole's azimuth.
"""

import argparse
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

from fisheyekit.camera import CameraIntrinsics, unproject_points
from fisheyekit.cli import main as cli_main
from fisheyekit.fileformats import write_camera
from fisheyekit.imageio import read_pnm, write_pnm
from fisheyekit.models import Equidistant

TOLERANCE_PX = 0.5


def render_pole(intr, axis_x, axis_z, radius, half_height, supersample=4):
    """Supersampled fisheye image of a vertical cylinder around ``x = axis_x, z = axis_z``.

    Pixels are white where a ray hits the cylinder's silhouette, black elsewhere;
    edge pixels get the fraction of covering subsamples.
    """
    offsets = (np.arange(supersample) + 0.5) / supersample - 0.5
    acc = np.zeros((intr.height, intr.width))
    ys, xs = np.mgrid[0 : intr.height, 0 : intr.width].astype(float)
    for oy in offsets:
        for ox in offsets:
            rays, ok = unproject_points(intr, np.stack([xs + ox, ys + oy], axis=-1))
            dx, dy, dz = rays[..., 0], rays[..., 1], rays[..., 2]
            horiz = np.hypot(dx, dz)
            with np.errstate(all="ignore"):
                # distance from the axis to the ray's vertical plane, and range to closest approach
                dist = np.abs(axis_x * dz - axis_z * dx) / horiz
                along = (axis_x * dx + axis_z * dz) / horiz
                height = dy / horiz * along
            hit = ok & (dist < radius) & (along > 0) & (np.abs(height) < half_height)
            acc += hit
    return np.clip(np.rint(255.0 * acc / supersample**2), 0, 255).astype(np.uint8)


def row_centroids(image, min_mass=255.0 * 2):
    """Intensity-weighted column centroid of every row with enough signal."""
    img = image.astype(float)
    mass = img.sum(axis=1)
    rows = np.flatnonzero(mass >= min_mass)
    cols = np.arange(img.shape[1])
    return rows, (img[rows] @ cols) / mass[rows]


def run(workdir, supersample=4, width=1280, height=966, pixel_scale=300.0, focal_e=1.075,
        axis_x=1.2, axis_z=2.0, radius=0.05, half_height=1.5, out_focal=300.0):
    """Render, rectify via the CLI, and return (expected_column, row_centroids)."""
    workdir = Path(workdir)
    intr = CameraIntrinsics(Equidistant(focal_e), 0.5 * (width - 1), 0.5 * (height - 1), pixel_scale, width, height)
    cam_path, in_path, out_path = workdir / "camera.json", workdir / "pole.pgm", workdir / "pole_cyl.pgm"
    write_camera(cam_path, intr)
    write_pnm(in_path, render_pole(intr, axis_x, axis_z, radius, half_height, supersample))
    code = cli_main([
        "rectify", "--camera", str(cam_path), "--viewport", "cylindrical", "--focal", str(out_focal),
        "--size", f"{width}x{height}", "--in", str(in_path), "--out", str(out_path),
    ])
    if code != 0:
        raise RuntimeError(f"rectify exited with {code}")
    rectified = read_pnm(out_path)
    expected = 0.5 * (width - 1) + out_focal * math.atan2(axis_x, axis_z)
    _, centroids = row_centroids(rectified)
    return expected, centroids


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", help="keep intermediate files here")
    parser.add_argument("--supersample", type=int, default=4)
    args = parser.parse_args(argv)
    with tempfile.TemporaryDirectory() as tmp:
        expected, centroids = run(args.workdir or tmp, args.supersample)
    if centroids.size == 0:
        print("pole not found in the rectified image")
        return 1
    worst = float(np.max(np.abs(centroids - expected)))
    print(f"rows={centroids.size} expected_column={expected:.3f} max_deviation={worst:.3f} px")
    return 0 if worst <= TOLERANCE_PX else 1


if __name__ == "__main__":
    sys.exit(main())
