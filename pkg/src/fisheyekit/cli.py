"""Command-line front end.

Exit codes: 0 success, 1 acceptance-check failure, 2 usage or input error,
3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from scipy.spatial.transform import Rotation

from . import equivalence
from .calibration import fit
from .camera import project_points, unproject_points
from .epipolar import epipolar_residual, essential_from_pose
from .errors import ConvergenceError, DegenerateData, FisheyeError
from .fileformats import dumps_camera, read_camera, read_correspondences, read_pairs, read_pose
from .imageio import read_pnm, write_pnm
from .models import MODEL_CLASSES, Division, DoubleSphere, FieldOfView, GeneralPerspective, Stereographic, UCM
from .rectification import ViewportSpec, build_remap, warp, write_remap

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3

TABLE1_TOL = 1e-12
NUMBER_FORMAT = "%.9g"


class UsageError(Exception):
    """Bad command-line input; mapped to exit code 2."""


def _fmt(values) -> str:
    return " ".join(NUMBER_FORMAT % v for v in values)


def _err(msg):
    print(f"fisheyekit: {msg}", file=sys.stderr)


def cmd_table1(args) -> int:
    rows = equivalence.table1(grid_size=args.grid_size)
    print(f"{'omega':>6} {'f_p':>8} {'f_e':>8} {'max_error':>10}")
    for row in rows:
        print(f"{row.omega:6.2f} {row.f_p:8.3f} {row.f_e:8.3f} {row.max_abs_error:10.2e}")
    worst = max(row.max_abs_error for row in rows)
    if worst > TABLE1_TOL:
        _err(f"max error {worst:.3e} exceeds {TABLE1_TOL:g}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


# -- convert ----------------------------------------------------------------


def _convert_model(model, target):
    """Converted model, or None for pairs without a defined relation."""
    if isinstance(model, FieldOfView) and target in ("equidistant", "extended_equidistant"):
        f_p, f_e = equivalence.fov_to_equidistant(model.omega)
        # both focal lengths scale with the model's overall focal length
        f_p, f_e = model.f * f_p, model.f * f_e
        print(f"f_p={f_p:.9g} f_e={f_e:.9g}", file=sys.stderr)
        return equivalence.equidistant_composite(f_p, f_e)
    if isinstance(model, Stereographic) and target == "division":
        return equivalence.stereographic_to_division(model.f)
    if isinstance(model, Division) and target == "stereographic":
        return equivalence.division_to_stereographic(model.a)
    if isinstance(model, GeneralPerspective) and target == "ucm":
        return model.to_ucm()
    if isinstance(model, UCM) and target == "general_perspective":
        return equivalence.ucm_to_general_perspective(model.alpha, model.f)
    if isinstance(model, DoubleSphere) and target == "ucm":
        return equivalence.double_sphere_to_ucm(model)
    return None


def cmd_convert(args) -> int:
    intr = read_camera(args.source)
    converted = _convert_model(intr.model, args.to)
    if converted is None:
        _err(f"unsupported conversion {intr.model.kind} -> {args.to}")
        return EXIT_INPUT
    report = equivalence.verify_equivalence(intr.model, converted)
    print(f"max {report.mode} error over {report.grid_size} points: {report.max_abs_error:.3e}", file=sys.stderr)
    sys.stdout.write(dumps_camera(intr.replace(model=converted)))
    return EXIT_OK


# -- project / unproject ------------------------------------------------------


def _stream_points(stream, dim):
    """Yield (lineno, point or None for blank lines) from whitespace-separated text."""
    for lineno, raw in enumerate(stream, start=1):
        parts = raw.split()
        if not parts:
            yield lineno, None
            continue
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise UsageError(f"line {lineno}: not a number") from None
        if len(values) != dim:
            raise UsageError(f"line {lineno}: expected {dim} values, got {len(values)}")
        yield lineno, np.array(values)


def _map_stream(args, dim, mapper) -> int:
    intr = read_camera(args.camera)
    out = []
    for _, point in _stream_points(sys.stdin, dim):
        if point is None:
            out.append("")
            continue
        result, ok = mapper(intr, point)
        out.append(_fmt(result) if ok else "INVALID")
    if out:
        sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def _project_one(intr, X):
    if not np.any(X):
        return None, False
    px, ok = project_points(intr, X)
    return px, bool(ok)


def _unproject_one(intr, p):
    ray, ok = unproject_points(intr, p)
    return ray, bool(ok)


def cmd_project(args) -> int:
    return _map_stream(args, 3, _project_one)


def cmd_unproject(args) -> int:
    return _map_stream(args, 2, _unproject_one)


# -- calibrate ------------------------------------------------------------------


def _parse_size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"size must look like WIDTHxHEIGHT, got {text!r}") from None
    if w <= 0 or h <= 0:
        raise UsageError("size must be positive")
    return w, h


def cmd_calibrate(args) -> int:
    data = read_correspondences(args.data)
    init = read_camera(args.init) if args.init else None
    if init is None and (args.size is None or args.pixel_scale is None):
        raise UsageError("calibrate needs --init or both --size and --pixel-scale")
    size = _parse_size(args.size) if args.size else None
    try:
        result = fit(data, args.model, init, image_size=size, pixel_scale=args.pixel_scale,
                     n_terms=args.n_terms, max_iter=args.max_iter)
    except ConvergenceError as exc:
        _err(str(exc))
        if exc.result is not None:
            print(f"rmse={exc.result.rmse:.6g} iterations={exc.result.iterations}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except DegenerateData as exc:
        _err(f"degenerate data: {exc}")
        return EXIT_INPUT
    print(
        f"model={args.model} points={len(data)} views={data.n_views} rmse={result.rmse:.6g} px "
        f"iterations={result.iterations} converged={result.converged} "
        f"gradient={result.gradient_norm:.3g} ({result.message})",
        file=sys.stderr,
    )
    sys.stdout.write(dumps_camera(result.intrinsics))
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


# -- rectify ---------------------------------------------------------------------


def cmd_rectify(args) -> int:
    intr = read_camera(args.camera)
    w, h = _parse_size(args.size)
    # virtual camera axes in the fisheye frame; positive yaw looks toward +X
    view_to_fisheye = Rotation.from_euler("YXZ", [args.yaw, args.pitch, args.roll], degrees=True).as_matrix()
    spec = ViewportSpec(args.viewport, w, h, args.focal, view_to_fisheye.T)
    image = read_pnm(args.input)
    if image.shape[1] != intr.width or image.shape[0] != intr.height:
        raise UsageError(
            f"image is {image.shape[1]}x{image.shape[0]} but the camera expects {intr.width}x{intr.height}"
        )
    table = build_remap(intr, spec)
    write_pnm(args.output, warp(image, table, fill=0, source_size=(intr.width, intr.height)))
    if args.save_map:
        write_remap(args.save_map, table)
    print(f"valid pixels: {int(table.valid.sum())} of {table.valid.size}", file=sys.stderr)
    return EXIT_OK


# -- epipolar ---------------------------------------------------------------------


def cmd_epipolar(args) -> int:
    cam1, cam2 = read_camera(args.camera1), read_camera(args.camera2)
    pose = read_pose(args.pose)
    pairs = read_pairs(args.pairs)
    s1, ok1 = unproject_points(cam1, pairs[:, :2])
    s2, ok2 = unproject_points(cam2, pairs[:, 2:])
    ok = ok1 & ok2
    E = essential_from_pose(pose)
    res = np.full(len(pairs), np.nan)
    if np.any(ok):
        res[ok] = epipolar_residual(E, s1[ok], s2[ok])
    for value, good in zip(res, ok):
        print(NUMBER_FORMAT % value if good else "INVALID")
    if not np.any(ok):
        raise UsageError("no pair could be unprojected")
    valid = res[ok]
    print(f"pairs={len(pairs)} valid={valid.size} mean={NUMBER_FORMAT % valid.mean()} "
          f"max={NUMBER_FORMAT % valid.max()}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fisheyekit", description="Fisheye camera model toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", help="field-of-view to equidistant equivalence table")
    p.add_argument("--grid-size", type=int, default=equivalence.DEFAULT_GRID_SIZE)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("convert", help="convert a camera file to an equivalent model")
    p.add_argument("--from", dest="source", required=True, help="camera JSON")
    p.add_argument("--to", required=True, help="target model kind")
    p.set_defaults(func=cmd_convert)

    for name, func, what in (("project", cmd_project, "X Y Z"), ("unproject", cmd_unproject, "u v")):
        p = sub.add_parser(name, help=f"map '{what}' lines from stdin")
        p.add_argument("--camera", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("calibrate", help="fit a model to point correspondences")
    p.add_argument("--model", required=True, choices=sorted(MODEL_CLASSES))
    p.add_argument("--data", required=True, help="correspondence file: view_id wx wy wz u v")
    p.add_argument("--init", help="starting camera JSON")
    p.add_argument("--size", help="image size WxH, when no --init is given")
    p.add_argument("--pixel-scale", type=float, help="pixels per image-plane unit, when no --init is given")
    p.add_argument("--n-terms", type=int, help="coefficient count for polynomial families")
    p.add_argument("--max-iter", type=int, default=100)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("rectify", help="warp a fisheye image into a virtual viewport")
    p.add_argument("--camera", required=True)
    p.add_argument("--viewport", required=True, choices=["rectilinear", "cylindrical", "cube3"])
    p.add_argument("--focal", required=True, type=float, help="output focal length in pixels")
    p.add_argument("--size", required=True, help="output size WxH")
    p.add_argument("--in", dest="input", required=True, help="input PGM/PPM")
    p.add_argument("--out", dest="output", required=True, help="output PGM/PPM")
    p.add_argument("--save-map", help="also write the remap table (FRMP)")
    p.add_argument("--yaw", type=float, default=0.0, help="degrees about the camera Y axis")
    p.add_argument("--pitch", type=float, default=0.0, help="degrees about the camera X axis")
    p.add_argument("--roll", type=float, default=0.0, help="degrees about the camera Z axis")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("epipolar", help="angular epipolar residuals of pixel pairs")
    p.add_argument("--camera1", required=True)
    p.add_argument("--camera2", required=True)
    p.add_argument("--pose", required=True, help="JSON with rotation and translation, X2 = R X1 + t")
    p.add_argument("--pairs", required=True, help="lines of u1 v1 u2 v2")
    p.set_defaults(func=cmd_epipolar)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except (FisheyeError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
