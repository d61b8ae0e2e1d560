"""Singular rays, escape-time style rasters of their iterated preimages, and a
box-counting dimension estimate."""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernel as K
from .billiard import orbit_points
from .errors import TooSparse
from .geom import ConvexPolygon, as_point


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float]
    direction: tuple[float, float]

    def as_row(self):
        return (*self.origin, *self.direction)


def singular_rays(P: ConvexPolygon, mode: str = "map_singular") -> list[Ray]:
    """Side-extension rays of ``P``.

    ``map_singular``: for each side the extension past its endpoint in the
    clockwise boundary direction, where the map is undefined.
    ``all_extensions``: both extensions of every side (2n rays).
    """
    if mode not in ("map_singular", "all_extensions"):
        raise ValueError(f"unknown mode {mode!r}")
    v = P.vertices
    n = P.n
    rays = []
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        d = (a - b) / np.hypot(*(a - b))
        rays.append(Ray(tuple(map(float, a)), tuple(map(float, d))))
        if mode == "all_extensions":
            rays.append(Ray(tuple(map(float, b)), tuple(map(float, -d))))
    if n == 2:
        # the two sides of a segment extend into the same pair of rays
        uniq = []
        for r in rays:
            if r not in uniq:
                uniq.append(r)
        rays = uniq
    return rays


def ray_array(rays) -> np.ndarray:
    return np.array([r.as_row() for r in rays], float).reshape(-1, 4)


def distance_to_rays(P: ConvexPolygon, pts, mode: str = "map_singular") -> np.ndarray:
    R = ray_array(singular_rays(P, mode))
    pts = np.asarray(pts, float).reshape(-1, 2)
    return np.array([K.min_ray_distance(R, x, y) for x, y in pts])


def segment_crosses_ray(a, b, ray: Ray) -> bool:
    """Proper or touching intersection of segment ab with ``ray``."""
    o = np.asarray(ray.origin)
    d = np.asarray(ray.direction)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    e = b - a
    den = e[0] * d[1] - e[1] * d[0]
    if den == 0.0:
        return False
    w = o - a
    s = (w[0] * d[1] - w[1] * d[0]) / den  # along the segment
    t = (w[0] * e[1] - w[1] * e[0]) / den  # along the ray
    return 0.0 <= s <= 1.0 and t >= 0.0


@dataclass
class RasterGrid:
    """Depth-stamped raster: -1 unmarked, k the first step index within eps
    of a singular ray.  Row 0 is the bottom of the window."""

    window: tuple[float, float, float, float]
    resolution: tuple[int, int]
    cells: np.ndarray

    @property
    def marked(self) -> np.ndarray:
        return self.cells >= 0

    @property
    def cell_size(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.window
        nx, ny = self.resolution
        return (x1 - x0) / nx, (y1 - y0) / ny

    def centers(self):
        x0, y0, x1, y1 = self.window
        nx, ny = self.resolution
        dx, dy = self.cell_size
        return x0 + (np.arange(nx) + 0.5) * dx, y0 + (np.arange(ny) + 0.5) * dy

    def cell_of(self, pts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ix, iy, inside-window mask) for an array of points."""
        pts = np.asarray(pts, float).reshape(-1, 2)
        x0, y0, _, _ = self.window
        dx, dy = self.cell_size
        ix = np.floor((pts[:, 0] - x0) / dx).astype(np.int64)
        iy = np.floor((pts[:, 1] - y0) / dy).astype(np.int64)
        ok = (ix >= 0) & (iy >= 0) & (ix < self.resolution[0]) & (iy < self.resolution[1])
        return ix, iy, ok


def _check_window(P: ConvexPolygon, window, resolution):
    x0, y0, x1, y1 = map(float, window)
    if np.ndim(resolution) == 0:
        resolution = (resolution, resolution)
    nx, ny = map(int, resolution)
    if nx < 16 or ny < 16:
        raise ValueError("resolution must be at least 16 x 16")
    v = P.vertices
    if not (x0 < v[:, 0].min() and v[:, 0].max() < x1 and y0 < v[:, 1].min() and v[:, 1].max() < y1):
        raise ValueError("window must strictly contain the table")
    return (x0, y0, x1, y1), (nx, ny)


def raster(P: ConvexPolygon, window, resolution, depth: int, eps: float | None = None) -> RasterGrid:
    """Approximate the singularity set up to ``depth`` iterations.

    Every cell centre is iterated forward; the cell is stamped with the first
    step index whose iterate comes within ``eps`` of a singular ray.  Orbits
    leaving the window or hitting an undefined point stay unmarked.
    """
    window, (nx, ny) = _check_window(P, window, resolution)
    x0, y0, x1, y1 = window
    dx, dy = (x1 - x0) / nx, (y1 - y0) / ny
    if eps is None:
        eps = 0.5 * math.hypot(dx, dy)
    if not eps > 0:
        raise ValueError("eps must be positive")
    xs = x0 + (np.arange(nx) + 0.5) * dx
    ys = y0 + (np.arange(ny) + 0.5) * dy
    rays = ray_array(singular_rays(P))
    cells = K.raster_depths(
        P._vx, P._vy, rays, xs, ys, int(depth), float(eps),
        np.array(window, float), P.tol,
    )
    return RasterGrid(window, (nx, ny), cells)


def _as_mask(data) -> np.ndarray:
    if isinstance(data, RasterGrid):
        return data.marked
    a = np.asarray(data)
    if a.ndim == 2 and a.shape[1] == 2 and a.dtype.kind == "f":
        raise TypeError("point sets must go through points_to_mask")
    return a.astype(bool) if a.dtype != bool else a


def points_to_mask(pts, resolution: int = 1024) -> np.ndarray:
    """Rasterise a point set on a square grid over its bounding box."""
    pts = np.asarray(pts, float).reshape(-1, 2)
    lo = pts.min(0)
    span = float((pts.max(0) - lo).max()) or 1.0
    idx = np.minimum(((pts - lo) / span * resolution).astype(np.int64), resolution - 1)
    m = np.zeros((resolution, resolution), bool)
    m[idx[:, 1], idx[:, 0]] = True
    return m


def box_counts(mask: np.ndarray, sizes) -> np.ndarray:
    out = []
    for s in sizes:
        ny = -(-mask.shape[0] // s) * s
        nx = -(-mask.shape[1] // s) * s
        pad = np.zeros((ny, nx), bool)
        pad[: mask.shape[0], : mask.shape[1]] = mask
        blocks = pad.reshape(ny // s, s, nx // s, s).any(axis=(1, 3))
        out.append(int(blocks.sum()))
    return np.array(out)


def box_dimension(data, sizes=None, min_marked: int = 1000) -> tuple[float, float]:
    """Box-counting slope of log N(s) against log(1/s) and the fit's r^2.

    ``data`` is a RasterGrid, a boolean mask, or an (N, 2) float point set
    (rasterised over its bounding box first).
    """
    a = np.asarray(data) if not isinstance(data, RasterGrid) else None
    if a is not None and a.ndim == 2 and a.shape[1] == 2 and a.dtype.kind == "f":
        mask = points_to_mask(a)
    else:
        mask = _as_mask(data)
    if int(mask.sum()) < min_marked:
        raise TooSparse(f"{int(mask.sum())} marked cells, need {min_marked}")
    if sizes is None:
        top = int(math.log2(min(mask.shape))) - 2
        sizes = [2 ** k for k in range(0, max(top, 0) + 1)]
    if len(sizes) < 5:
        raise TooSparse("need at least five box sizes")
    counts = box_counts(mask, sizes)
    x = np.log(1.0 / np.asarray(sizes, float))
    y = np.log(counts.astype(float))
    A = np.c_[x, np.ones_like(x)]
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss if ss > 0 else 1.0
    return float(coef[0]), r2


def orbit_mask(grid: RasterGrid, pts) -> np.ndarray:
    ix, iy, ok = grid.cell_of(pts)
    m = np.zeros((grid.resolution[1], grid.resolution[0]), bool)
    m[iy[ok], ix[ok]] = True
    return m


def _dilate(m: np.ndarray, r: int) -> np.ndarray:
    out = m.copy()
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            out |= np.roll(np.roll(m, dy, 0), dx, 1)
    return out


def orbit_closure_compare(
    P: ConvexPolygon, x0, iterations: int, window, resolution, depth: int,
    eps: float | None = None, slack: int = 1,
) -> dict:
    """Compare the cells visited by one forward orbit with the singularity
    raster.  A cell counts as matched when a marked cell of the other raster
    lies within ``slack`` cells.  ``overlap`` is the smaller of the two
    match fractions."""
    grid = raster(P, window, resolution, depth, eps)
    if iterations <= 0:
        return {"orbit_in_singular": 0.0, "singular_in_orbit": 0.0, "overlap": 0.0,
                "orbit_cells": 0, "singular_cells": int(grid.marked.sum())}
    pts, _ = orbit_points(P, as_point(x0), int(iterations))
    om = orbit_mask(grid, pts)
    sm = grid.marked
    no, ns = int(om.sum()), int(sm.sum())
    if no == 0 or ns == 0:
        a = b = 0.0
    else:
        a = float((om & _dilate(sm, slack)).sum()) / no
        b = float((sm & _dilate(om, slack)).sum()) / ns
    return {"orbit_in_singular": a, "singular_in_orbit": b, "overlap": min(a, b),
            "orbit_cells": no, "singular_cells": ns}


# --- export --------------------------------------------------------------


def _image_rows(grid: RasterGrid) -> np.ndarray:
    return grid.cells[::-1]  # top row first


def write_pgm(grid: RasterGrid, path) -> None:
    """Binary PGM: unmarked white, marked cells darker for shallower depth."""
    c = _image_rows(grid)
    top = max(int(c.max()), 0) + 1
    img = np.full(c.shape, 255, np.uint8)
    m = c >= 0
    img[m] = (200.0 * c[m] / top).astype(np.uint8)
    ny, nx = c.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{nx} {ny}\n255\n".encode())
        f.write(img.tobytes())


def write_ppm(grid: RasterGrid, path) -> None:
    """Binary PPM with one hue per depth layer."""
    c = _image_rows(grid)
    top = max(int(c.max()), 0) + 1
    pal = np.array(
        [[int(255 * t) for t in colorsys.hsv_to_rgb(0.75 * k / max(top, 1), 0.9, 0.85)] for k in range(top)],
        np.uint8,
    ).reshape(-1, 3)
    img = np.full(c.shape + (3,), 255, np.uint8)
    m = c >= 0
    img[m] = pal[c[m]]
    ny, nx = c.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{nx} {ny}\n255\n".encode())
        f.write(img.tobytes())


def write_depth_csv(grid: RasterGrid, path) -> None:
    iy, ix = np.nonzero(grid.marked)
    lines = ["ix,iy,depth"] + [f"{a},{b},{grid.cells[b, a]}" for a, b in zip(ix, iy)]
    Path(path).write_text("\n".join(lines) + "\n")
