"""Flat-file output: CSV, SVG and JSON with shortest round-trip floats, so
files are byte-identical for identical inputs."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, sort_keys=True)


def write_svg(path, table=None, points=None, circles=(), extra_points=None, size: int = 800) -> None:
    """Orbit picture: even-indexed points joined by segments, odd-indexed points
    as dots, optional circles (centre, radius) and a second point cloud."""
    clouds = [np.asarray(p, float).reshape(-1, 2) for p in (points, extra_points) if p is not None]
    if table is not None:
        clouds.append(np.asarray(table.vertices, float))
    allp = np.vstack(clouds) if clouds else np.zeros((1, 2))
    lo = allp.min(0)
    hi = allp.max(0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span
    lo = lo - pad
    span += 2 * pad
    k = size / span

    def tx(p):
        return (p[0] - lo[0]) * k, size - (p[1] - lo[1]) * k

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    if table is not None:
        pts = " ".join("{},{}".format(*map(lambda v: f"{v:.3f}", tx(v))) for v in table.vertices)
        out.append(f'<polygon points="{pts}" fill="#cccccc" stroke="black" stroke-width="1"/>')
    for c, r in circles:
        cx, cy = tx(c)
        out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r * k:.3f}" fill="none" stroke="#3a7" stroke-width="0.5"/>')
    if points is not None:
        P = np.asarray(points, float).reshape(-1, 2)
        even = P[0::2]
        if len(even) > 1:
            pl = " ".join("{:.3f},{:.3f}".format(*tx(p)) for p in even)
            out.append(f'<polyline points="{pl}" fill="none" stroke="#225" stroke-width="0.6"/>')
        for p in P[1::2]:
            x, y = tx(p)
            out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.2" fill="#c33"/>')
    if extra_points is not None:
        for p in np.asarray(extra_points, float).reshape(-1, 2):
            x, y = tx(p)
            out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.0" fill="#1a6b3a"/>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
