"""Command-line front-end.

    olb orbit --table square --seed 100,0 --iters 2000 --out orbit.csv,orbit.svg
    olb singularity --table regular:5 --depth 14 --res 1200 --out pent.pgm
    olb extouch --sides 1,1,1

Exit codes: 1 bad arguments, 2 invalid table, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as A
from . import centers as C
from . import escape as E
from . import extouch as X
from . import singularity as S
from .billiard import orbit as run_orbit
from .errors import BilliardError, InvalidPolygon, TooSparse
from .geom import ConvexPolygon
from .io import dumps, fmt, write_csv, write_svg

EXIT_ARGS, EXIT_TABLE, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ARGS)


# --- argument parsing helpers ----------------------------------------------


def floats(text: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("numbers must be finite")
    return vals


def _pair(text):
    return tuple(floats(text, 2))


def _window(text):
    x0, y0, x1, y1 = floats(text, 4)
    if not (x1 > x0 and y1 > y0):
        raise argparse.ArgumentTypeError("window must be x0,y0,x1,y1 with x1 > x0 and y1 > y0")
    return (x0, y0, x1, y1)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive(text):
    v = floats(text, 1)[0]
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _resolution(text):
    parts = text.split(",")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"resolution must be N or NX,NY, got {text!r}")
    if len(vals) not in (1, 2) or min(vals) <= 0:
        raise argparse.ArgumentTypeError("resolution must be N or NX,NY with positive entries")
    return vals[0] if len(vals) == 1 else tuple(vals)


def _scales(text):
    vals = floats(text)
    if min(vals) <= 0:
        raise argparse.ArgumentTypeError("scales must be positive")
    return vals


def _outs(text):
    return [p for p in text.split(",") if p]


def load_table(spec: str) -> ConvexPolygon:
    """Builtin name (square, regular:n, segment, kite:a, random:n:seed) or a
    JSON file holding a ``vertices`` array of [x, y] pairs."""
    parts = spec.split(":")
    name = parts[0]
    try:
        if name == "square" and len(parts) == 1:
            return ConvexPolygon.square()
        if name == "segment" and len(parts) == 1:
            return ConvexPolygon.segment()
        if name == "regular" and len(parts) == 2:
            n = int(parts[1])
            if n < 3:
                raise InvalidPolygon("regular polygons need n >= 3")
            return ConvexPolygon.regular(n)
        if name == "kite" and len(parts) == 2:
            return ConvexPolygon.kite(float(parts[1]))
        if name == "random" and len(parts) == 3:
            n = int(parts[1])
            if n < 3:
                raise InvalidPolygon("random polygons need n >= 3")
            return ConvexPolygon.random(n, int(parts[2]))
    except ValueError as exc:
        if isinstance(exc, InvalidPolygon):
            raise
        raise InvalidPolygon(f"bad table spec {spec!r}: {exc}")
    path = Path(spec)
    if not path.is_file():
        raise InvalidPolygon(f"unknown table {spec!r} (not a builtin and no such file)")
    try:
        doc = json.loads(path.read_text())
        verts = doc["vertices"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InvalidPolygon(f"{spec}: expected a JSON object with a 'vertices' array ({exc})")
    return ConvexPolygon(verts)


def _normalized(P: ConvexPolygon) -> ConvexPolygon:
    return P.scaled(1.0 / P.diameter)


def _default_window(P: ConvexPolygon, factor: float = 4.0):
    c = P.vertices.mean(0)
    h = factor * P.diameter
    return (c[0] - h, c[1] - h, c[0] + h, c[1] + h)


# --- subcommands -------------------------------------------------------------


def cmd_orbit(a) -> dict:
    P = load_table(a.table)
    if P.contains(a.seed, strict=False):
        raise UsageError(f"seed {tuple(a.seed)} is not outside the table")
    o = run_orbit(P, a.seed, a.iters, a.stop_radius)
    pts = o.points
    r = np.hypot(*pts.T)
    for path in a.out:
        if path.endswith(".csv"):
            write_csv(path, ["k", "x", "y"], [(k, p[0], p[1]) for k, p in enumerate(pts)])
        elif path.endswith(".svg"):
            circles = [(s.record.circle.center, s.record.circle.radius) for s in o.samples[: a.circles]]
            write_svg(path, P, pts, circles)
        else:
            raise UsageError(f"orbit writes .csv or .svg, not {path}")
    return {
        "experiment": "orbit", "table": a.table, "seed": list(a.seed),
        "steps": len(o.samples), "stop": o.terminal.reason,
        "final": list(pts[-1]), "r_min": float(r.min()), "r_max": float(r.max()),
        "unsteady": sum(1 for s in o.samples if not s.record.steady),
    }


def _raster_from(a, P):
    window = a.window or _default_window(P)
    return S.raster(P, window, a.res, a.depth, a.eps)


def _dimension_report(mask) -> dict:
    try:
        slope, r2 = S.box_dimension(mask)
        return {"box_dimension": slope, "r2": r2}
    except TooSparse as exc:
        return {"box_dimension": None, "r2": None, "note": str(exc)}


def cmd_singularity(a) -> dict:
    P = load_table(a.table)
    g = _raster_from(a, P)
    for path in a.out:
        if path.endswith(".pgm"):
            S.write_pgm(g, path)
        elif path.endswith(".ppm"):
            S.write_ppm(g, path)
        elif path.endswith(".csv"):
            S.write_depth_csv(g, path)
        else:
            raise UsageError(f"singularity writes .pgm, .ppm or .csv, not {path}")
    counts = np.bincount(g.cells[g.marked].ravel(), minlength=a.depth + 1)
    rep = {
        "experiment": "singularity", "table": a.table, "depth": a.depth,
        "window": list(g.window), "resolution": list(g.resolution),
        "marked": int(g.marked.sum()), "per_depth": counts.tolist(),
    }
    rep.update(_dimension_report(g.marked))
    return rep


def cmd_dimension(a) -> dict:
    if a.fixture:
        mask = dimension_fixture(a.fixture, a.res if isinstance(a.res, int) else a.res[0])
        rep = {"experiment": "dimension", "fixture": a.fixture, "marked": int(mask.sum())}
    else:
        P = load_table(a.table)
        g = _raster_from(a, P)
        mask = g.marked
        rep = {"experiment": "dimension", "table": a.table, "depth": a.depth,
               "resolution": list(g.resolution), "marked": int(mask.sum())}
    slope, r2 = S.box_dimension(mask)
    rep.update({"box_dimension": slope, "r2": r2})
    return rep


def dimension_fixture(name: str, res: int) -> np.ndarray:
    """Calibration masks: a diagonal segment, a filled square, Cantor dust."""
    if name == "segment":
        m = np.zeros((res, res), bool)
        i = np.arange(res)
        m[i, i] = True
        return m
    if name == "square":
        return np.ones((res, res), bool)
    if name == "cantor":
        level = max(1, round(math.log(res, 3)))
        keep = np.array([1], bool)
        for _ in range(level):
            keep = np.concatenate([keep, np.zeros_like(keep), keep])
        return np.outer(keep, keep)
    raise UsageError(f"unknown fixture {name!r}")


def _starts(radius: float, count: int):
    """Evenly spaced starts on the circle of the given radius."""
    return [(radius * math.cos(2 * math.pi * k / count), radius * math.sin(2 * math.pi * k / count))
            for k in range(count)]


def cmd_once_around(a) -> dict:
    P = load_table(a.table)
    d = P.diameter
    R = a.radius or A.start_radius(P)
    rows = []
    for x in _starts(R, a.starts):
        o = A.once_around(P, x, a.cap)
        row = {"start": list(x), "wrap_index": o.wrap_index,
               "terminal": o.terminal.reason if o.terminal else None}
        if o.complete:
            dev, c1, ok = A.annulus_stats(o)
            far = o.radii.min() >= 8 * d
            unsteady = sum(1 for s in o.samples if not s.record.steady)
            ang = [t for _, t in A.obtuse_angles(o, 5 * d)]
            jumps = A.ellipse_jumps(o, 5 * d, 512)
            row.update({
                "annulus_dev": dev, "C1": c1, "annulus_ok": ok,
                "unsteady": unsteady, "unsteady_bound": 2 * P.n + 1,
                "unsteady_ok": unsteady <= 2 * P.n + 1,
                "crossing_literal_mismatches": len(A.crossing_mismatches(o, 8 * d, "literal")) if far else None,
                "crossing_either_mismatches": len(A.crossing_mismatches(o, 8 * d, "either")) if far else None,
                "min_obtuse_angle": min(ang) if ang else None,
                "obtuse_ok": all(t >= 2 * math.pi / 3 for t in ang),
                "max_jump_ratio": max((j / b for _, j, b in jumps), default=None),
            })
        rows.append(row)
    return {"experiment": "once-around", "table": a.table, "radius": R, "orbits": rows}


def cmd_centers(a) -> dict:
    K = _normalized(load_table(a.table))
    rows = []
    clouds = []
    for d in a.d:
        dd = C.dual_deviation(K, d, a.angle, a.cap)
        clouds.append(dd.centers / d)
        rows.append({"d": d, "sup_dev": dd.sup_dev,
                     "phi_defect": dd.phi_defect, "radius_defect": dd.radius_defect,
                     "wrap_index": dd.wrap_index, "samples": len(dd.centers)})
    cloud = clouds[-1]
    img = C.rasterize_cloud(cloud * a.d[-1], a.raster)
    score = C.rotational_symmetry_score(img, a.order)
    for path in a.out:
        if path.endswith(".svg"):
            g = A.dual_curve(K.scaled(a.d[-1]), 1024)
            write_svg(path, None, g, extra_points=cloud * a.d[-1])
        elif path.endswith(".csv"):
            write_csv(path, ["k", "cx", "cy"], [(k, p[0], p[1]) for k, p in enumerate(cloud * a.d[-1])])
        else:
            raise UsageError(f"centers writes .svg or .csv, not {path}")
    ratio = rows[-1]["sup_dev"] / rows[0]["sup_dev"] if len(rows) > 1 and rows[0]["sup_dev"] > 0 else None
    return {"experiment": "centers", "table": a.table, "runs": rows,
            "fine_over_coarse": ratio, "symmetry_order": a.order, "symmetry_score": score}


def cmd_extouch(a) -> dict:
    if a.triangle is not None:
        Q = np.array(a.triangle, float).reshape(3, 2)
        T = X.TriangleSides.of(Q)
    else:
        try:
            T = X.TriangleSides(*a.sides)
        except ValueError as exc:
            raise UsageError(str(exc))
        Q = X.triangle_from_sides(*T.as_tuple())
    sol = X.solve_parent(T)
    R, defect = X.place_parent(Q)
    for path in a.out:
        if path.endswith(".svg"):
            tri = ConvexPolygon(Q if X._area2(Q) > 0 else Q[::-1])
            write_svg(path, tri, np.vstack([R, R[:1]]), extra_points=R)
        else:
            raise UsageError(f"extouch writes .svg, not {path}")
    diam = max(T.as_tuple())
    return {
        "experiment": "extouch", "extouch_sides": list(T.as_tuple()),
        "parent_sides": [sol.x, sol.y, sol.z], "residual": sol.residual,
        "bracket": list(sol.root_bracket), "parent_vertices": R.tolist(),
        "orbit_defect": defect, "orbit_defect_over_diameter": defect / diam,
    }


def cmd_escape(a) -> dict:
    rep = {"experiment": "escape"}
    if a.census:
        cen, sing = E.label_census(a.census, a.half_width, a.census_seed)
        rep["census"] = {k: {"count": c, "max_radius": r} for k, r_c in sorted(cen.items()) for c, r in [r_c]}
        rep["census_singular"] = sing
        rep["labels_seen"] = len(cen)
        rep["labels_admissible"] = sorted(cen) == sorted(str(E.PieceLabel(*t)) for t in E.ADMISSIBLE)
        rep["labels_far"] = sum(1 for c, r in cen.values() if r > 25)
    x0, y0, x1, y1 = a.window
    fit = E.fit_constants((x0, x1, y0, y1), a.n_range, a.frame, not a.literal_word)
    nr = np.array([n * r for n, r in fit.rows])
    rep.update({
        "C_m": fit.C_m, "C_x": fit.C_x, "C_y": fit.C_y, "frame": a.frame,
        "amended_word": not a.literal_word, "n_range": list(a.n_range),
        "all_finite": bool(np.all(np.isfinite(nr))),
        "max_n_r": float(nr.max()), "median_n_r": float(np.median(nr)),
        "bounded": fit.bounded(),
    })
    for path in a.out:
        if path.endswith(".csv"):
            t = fit.table()
            write_csv(path, ["n", "C_m", "C_x", "C_y", "r", "n_r"],
                      [(r["n"], r["C_m"], r["C_x"], r["C_y"], r["r"], r["n_r"]) for r in t])
        else:
            raise UsageError(f"escape writes .csv, not {path}")
    return rep


def cmd_dual_curve(a) -> dict:
    P = load_table(a.table)
    th = np.linspace(-math.pi, math.pi, a.samples, endpoint=False)
    g = A.dual_radial(P, th)
    for path in a.out:
        if path.endswith(".csv"):
            write_csv(path, ["theta", "gamma", "x", "y"],
                      [(t, v, v * math.cos(t), v * math.sin(t)) for t, v in zip(th, g)])
        elif path.endswith(".svg"):
            write_svg(path, None, np.c_[g * np.cos(th), g * np.sin(th)])
        else:
            raise UsageError(f"dual-curve writes .csv or .svg, not {path}")
    return {"experiment": "dual-curve", "table": a.table, "samples": a.samples,
            "gamma_min": float(g.min()), "gamma_max": float(g.max())}


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="olb", description="Outer length billiard experiments.")
    p.add_argument("--config", help="JSON file whose keys override option defaults")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, table="square"):
        sp.add_argument("--table", default=table, help="square | regular:n | segment | kite:a | random:n:seed | file.json")
        sp.add_argument("--out", type=_outs, default=[], help="comma-separated output files")
        sp.add_argument("--json", action="store_true", help="print the report as JSON")

    def raster_opts(sp, depth=10, res=512):
        sp.add_argument("--depth", type=_positive_int, default=depth)
        sp.add_argument("--res", type=_resolution, default=res)
        sp.add_argument("--window", type=_window, default=None, help="x0,y0,x1,y1")
        sp.add_argument("--eps", type=_positive, default=None)

    sp = sub.add_parser("orbit", help="orbit CSV and SVG")
    common(sp)
    sp.add_argument("--seed", type=_pair, required=True, help="x,y")
    sp.add_argument("--iters", type=_positive_int, default=1000)
    sp.add_argument("--stop-radius", type=_positive, default=math.inf)
    sp.add_argument("--circles", type=int, default=0, help="draw the first N auxiliary circles")
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("singularity", help="singularity raster")
    common(sp, "regular:5")
    raster_opts(sp)
    sp.set_defaults(func=cmd_singularity)

    sp = sub.add_parser("dimension", help="box-counting dimension")
    common(sp, "regular:5")
    raster_opts(sp, depth=14, res=1024)
    sp.add_argument("--fixture", choices=["segment", "square", "cantor"], default=None)
    sp.set_defaults(func=cmd_dimension)

    sp = sub.add_parser("once-around", help="annulus and steadiness report")
    common(sp)
    sp.add_argument("--starts", type=_positive_int, default=8)
    sp.add_argument("--radius", type=_positive, default=None, help="defaults to (4 pi + 11) d")
    sp.add_argument("--cap", type=_positive_int, default=100_000)
    sp.set_defaults(func=cmd_once_around)

    sp = sub.add_parser("centers", help="centre cloud against the dual curve")
    common(sp, "regular:5")
    sp.add_argument("--d", type=_scales, default=[1e-2, 1e-3], help="comma-separated scales, coarse first")
    sp.add_argument("--angle", type=float, default=0.0)
    sp.add_argument("--cap", type=_positive_int, default=1_000_000)
    sp.add_argument("--raster", type=_positive_int, default=256)
    sp.add_argument("--order", type=_positive_int, default=6)
    sp.set_defaults(func=cmd_centers)

    sp = sub.add_parser("extouch", help="parent triangle of an extouch triangle")
    sp.add_argument("--out", type=_outs, default=[])
    sp.add_argument("--json", action="store_true")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--sides", type=lambda t: floats(t, 3), help="a,b,c")
    g.add_argument("--triangle", type=lambda t: floats(t, 6), help="x1,y1,x2,y2,x3,y3")
    sp.set_defaults(func=cmd_extouch)

    sp = sub.add_parser("escape", help="square piece census and escape fit")
    sp.add_argument("--out", type=_outs, default=[])
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--census", type=int, default=0, help="number of census samples (0 skips)")
    sp.add_argument("--census-seed", type=int, default=0)
    sp.add_argument("--half-width", type=_positive, default=30.0)
    sp.add_argument("--window", type=_window, default=(-50.0, -50.0, 50.0, 50.0), help="x0,y0,x1,y1")
    sp.add_argument("--n-range", type=lambda t: tuple(int(v) for v in floats(t, 2)), default=(10, 200))
    sp.add_argument("--frame", choices=["rotated", "literal"], default="rotated")
    sp.add_argument("--literal-word", action="store_true", help="use the word exactly as written")
    sp.set_defaults(func=cmd_escape)

    sp = sub.add_parser("dual-curve", help="sample Gamma(theta)")
    common(sp)
    sp.add_argument("--samples", type=_positive_int, default=1024)
    sp.set_defaults(func=cmd_dual_curve)
    return p


def _apply_threads():
    v = os.environ.get("OLB_THREADS")
    if not v:
        return
    import numba

    try:
        n = int(v)
    except ValueError:
        raise UsageError(f"OLB_THREADS must be an integer, got {v!r}")
    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def _print_report(rep: dict, as_json: bool):
    if as_json:
        print(dumps(rep))
        return
    for k, v in rep.items():
        if isinstance(v, list) and v and isinstance(v[0], dict):
            print(f"{k}:")
            for row in v:
                print("  " + ", ".join(f"{kk}={_show(vv)}" for kk, vv in row.items()))
        elif isinstance(v, dict):
            print(f"{k}:")
            for kk, vv in v.items():
                print(f"  {kk}: {_show(vv)}")
        else:
            print(f"{k}: {_show(v)}")


def _show(v):
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_show(x) for x in v) + ")"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_show(x)}" for k, x in v.items()) + "}"
    return fmt(v)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            try:
                cfg = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config {args.config}: {exc}")
            sp = parser._subparsers._group_actions[0].choices[args.command]
            sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
            args = parser.parse_args(argv)
        _apply_threads()
        rep = args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"olb: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except InvalidPolygon as exc:
        print(f"olb: invalid table: {exc}", file=sys.stderr)
        return EXIT_TABLE
    except (BilliardError, ValueError, FloatingPointError) as exc:
        print(f"olb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _print_report(rep, args.json)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
