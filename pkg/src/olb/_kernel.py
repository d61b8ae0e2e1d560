"""Compiled inner loops for the outer length billiard.

Vertices are passed as two float64 arrays (counter-clockwise).  Every routine
takes an absolute tolerance ``tol`` (1e-9 times the table diameter at the call
sites) used for all side-of-line decisions.

The map follows the orientation of the construction: the second support line
(the one carrying the tangency vertex ``p``) touches the table at the vertex
that is on the right as seen from ``x``.  ``reverse=True`` mirrors this choice
and yields the inverse map.
"""

import math
import os

import numba
import numpy as np
from numba import njit, prange

# the workqueue layer is always present; results never depend on the layer
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

OK = 0
INSIDE = 1
SINGULAR = 2
DEGENERATE = 3
NOT_FOUND = 4
AMBIGUOUS = 5

STATUS_NAMES = {
    OK: "ok",
    INSIDE: "inside",
    SINGULAR: "singular",
    DEGENERATE: "degenerate",
    NOT_FOUND: "not_found",
    AMBIGUOUS: "ambiguous",
}

# separation (radians, as a unit-vector difference) below which two support
# normals are considered the same line
_SAME_NORMAL = 1e-9


@njit(cache=True)
def edge_distances(vx, vy, px, py, out):
    """Signed distance of (px, py) to each edge line; negative means the edge faces the point."""
    n = vx.shape[0]
    for i in range(n):
        j = (i + 1) % n
        ex = vx[j] - vx[i]
        ey = vy[j] - vy[i]
        ln = math.hypot(ex, ey)
        out[i] = (ex * (py - vy[i]) - ey * (px - vx[i])) / ln


@njit(cache=True)
def tangent_vertices(vx, vy, px, py, tol):
    """Return (status, right, left, right_aligned, left_aligned).

    ``right`` is the support vertex on the viewer's right, ``left`` the one on
    the left.  The aligned flags report that the corresponding support line
    contains a whole edge (the point lies on that edge's extension).
    """
    n = vx.shape[0]
    s = np.empty(n)
    edge_distances(vx, vy, px, py, s)
    nvis = 0
    for i in range(n):
        if s[i] < -tol:
            nvis += 1
    if nvis == 0:
        if n == 2 and abs(s[0]) <= tol:
            # on the line of a 2-gon: singular off the segment, inside on it
            ex = vx[1] - vx[0]
            ey = vy[1] - vy[0]
            t = ((px - vx[0]) * ex + (py - vy[0]) * ey) / (ex * ex + ey * ey)
            if t < 0.0 or t > 1.0:
                return SINGULAR, -1, -1, True, True
        return INSIDE, -1, -1, False, False
    a = -1
    b = -1
    for i in range(n):
        prev = (i - 1 + n) % n
        if s[i] < -tol and not (s[prev] < -tol):
            a = i
        if s[prev] < -tol and not (s[i] < -tol):
            b = i
    left_aligned = abs(s[(a - 1 + n) % n]) <= tol
    right_aligned = abs(s[b]) <= tol
    return OK, b, a, right_aligned, left_aligned


@njit(cache=True)
def aux_circle(px, py, nx, ny, ox, oy, mx, my):
    """Circle tangent to a line at p (centre p + t*n) and tangent to the line
    through o with unit normal m pointing towards the circle.  Returns t."""
    dmx = mx - nx
    dmy = my - ny
    denom = 0.5 * (dmx * dmx + dmy * dmy)
    num = mx * (px - ox) + my * (py - oy)
    if denom <= 0.0:
        return -1.0
    return num / denom


@njit(cache=True)
def third_line(vx, vy, cx, cy, r, skip, u1x, u1y, tol):
    """Find the common support line of the circle and the polygon other than
    the one with outward normal (u1x, u1y).

    Tangents from every vertex (except ``skip``, the tangency vertex) to the
    circle are enumerated and kept when the whole polygon lies behind them.
    Returns (status, vertex, ux, uy) with u the outward unit normal.
    """
    n = vx.shape[0]
    best_j = -1
    bux = 0.0
    buy = 0.0
    count = 0
    for j in range(n):
        if j == skip:
            continue
        wx = vx[j] - cx
        wy = vy[j] - cy
        # D^2 - r^2 written around the tangency vertex to avoid cancellation
        if skip >= 0:
            qx = vx[j] - vx[skip]
            qy = vy[j] - vy[skip]
            nx = (vx[skip] - cx) / r
            ny = (vy[skip] - cy) / r
            # centre = p - r*nhat where nhat points from centre to p
            ss = qx * qx + qy * qy + 2.0 * r * (qx * nx + qy * ny)
        else:
            ss = wx * wx + wy * wy - r * r
        if ss <= 0.0:
            continue
        sroot = math.sqrt(ss)
        d2 = wx * wx + wy * wy
        for sgn in (1.0, -1.0):
            ux = (r * wx - sgn * sroot * wy) / d2
            uy = (r * wy + sgn * sroot * wx) / d2
            nrm = math.hypot(ux, uy)
            ux /= nrm
            uy /= nrm
            ok = True
            for k in range(n):
                if ux * (vx[k] - vx[j]) + uy * (vy[k] - vy[j]) > tol:
                    ok = False
                    break
            if not ok:
                continue
            if math.hypot(ux - u1x, uy - u1y) < _SAME_NORMAL:
                continue
            if best_j >= 0:
                if math.hypot(ux - bux, uy - buy) < _SAME_NORMAL:
                    # same line through a second vertex (edge aligned)
                    continue
                count += 1
                continue
            best_j = j
            bux = ux
            buy = uy
            count = 1
    if best_j < 0:
        return NOT_FOUND, -1, 0.0, 0.0
    if count > 1:
        return AMBIGUOUS, best_j, bux, buy
    return OK, best_j, bux, buy


@njit(cache=True)
def step_point(vx, vy, px, py, reverse, tol):
    """One application of the map (or its inverse).

    Returns (status, ox, oy, i_first, i_tangent, i_third, cx, cy, r) where the
    three indices are the contact vertices of the line through the input
    point not carrying p, the line carrying p, and the newly found line.
    """
    st, right, left, right_al, left_al = tangent_vertices(vx, vy, px, py, tol)
    if st != OK:
        return st, np.nan, np.nan, -1, -1, -1, np.nan, np.nan, np.nan
    if reverse:
        ip = left
        iq = right
        if left_al:
            return SINGULAR, np.nan, np.nan, -1, -1, -1, np.nan, np.nan, np.nan
        sigma = -1.0
    else:
        ip = right
        iq = left
        if right_al:
            return SINGULAR, np.nan, np.nan, -1, -1, -1, np.nan, np.nan, np.nan
        sigma = 1.0
    # line through the point and p, non-table normal n
    e2x = vx[ip] - px
    e2y = vy[ip] - py
    l2 = math.hypot(e2x, e2y)
    e2x /= l2
    e2y /= l2
    nx = sigma * e2y
    ny = -sigma * e2x
    # the other support line, normal m pointing to the table
    e1x = vx[iq] - px
    e1y = vy[iq] - py
    l1 = math.hypot(e1x, e1y)
    e1x /= l1
    e1y /= l1
    mx = sigma * e1y
    my = -sigma * e1x
    t = aux_circle(vx[ip], vy[ip], nx, ny, px, py, mx, my)
    scale = tol * 1e-3  # 1e-12 * diameter
    if not (t > scale):
        return DEGENERATE, np.nan, np.nan, iq, ip, -1, np.nan, np.nan, np.nan
    cx = vx[ip] + t * nx
    cy = vy[ip] + t * ny
    st3, j, ux, uy = third_line(vx, vy, cx, cy, t, ip, -mx, -my, tol)
    if st3 == NOT_FOUND:
        return NOT_FOUND, np.nan, np.nan, iq, ip, -1, cx, cy, t
    if st3 == AMBIGUOUS:
        return AMBIGUOUS, np.nan, np.nan, iq, ip, j, cx, cy, t
    denom = ux * e2x + uy * e2y
    if abs(denom) < 1e-300:
        return DEGENERATE, np.nan, np.nan, iq, ip, j, cx, cy, t
    s = (ux * (vx[j] - vx[ip]) + uy * (vy[j] - vy[ip])) / denom
    if not (s > 0.0):
        return DEGENERATE, np.nan, np.nan, iq, ip, j, cx, cy, t
    return OK, vx[ip] + s * e2x, vy[ip] + s * e2y, iq, ip, j, cx, cy, t


@njit(cache=True, parallel=True)
def step_batch(vx, vy, pts, reverse, tol):
    m = pts.shape[0]
    status = np.empty(m, np.int64)
    out = np.empty((m, 2))
    idx = np.empty((m, 3), np.int64)
    circ = np.empty((m, 3))
    for i in prange(m):
        st, ox, oy, a, b, c, cx, cy, r = step_point(
            vx, vy, pts[i, 0], pts[i, 1], reverse, tol
        )
        status[i] = st
        out[i, 0] = ox
        out[i, 1] = oy
        idx[i, 0] = a
        idx[i, 1] = b
        idx[i, 2] = c
        circ[i, 0] = cx
        circ[i, 1] = cy
        circ[i, 2] = r
    return status, out, idx, circ


@njit(cache=True)
def orbit_points(vx, vy, px, py, n_max, stop_radius, tol):
    """Iterate the map; returns (points, count, stop_status)."""
    pts = np.empty((n_max + 1, 2))
    pts[0, 0] = px
    pts[0, 1] = py
    x = px
    y = py
    for i in range(n_max):
        st, ox, oy, a, b, c, cx, cy, r = step_point(vx, vy, x, y, False, tol)
        if st != OK:
            return pts, i + 1, st
        x = ox
        y = oy
        pts[i + 1, 0] = x
        pts[i + 1, 1] = y
        if math.hypot(x, y) > stop_radius:
            return pts, i + 2, -1
    return pts, n_max + 1, OK


@njit(cache=True)
def area_step_point(vx, vy, px, py, reverse, tol):
    """Outer area map: reflection through the right (or left) support vertex."""
    st, right, left, right_al, left_al = tangent_vertices(vx, vy, px, py, tol)
    if st != OK:
        return st, np.nan, np.nan, -1
    if reverse:
        if left_al:
            return SINGULAR, np.nan, np.nan, -1
        p = left
    else:
        if right_al:
            return SINGULAR, np.nan, np.nan, -1
        p = right
    return OK, 2.0 * vx[p] - px, 2.0 * vy[p] - py, p


@njit(cache=True)
def ray_distance(ox, oy, dx, dy, px, py):
    t = (px - ox) * dx + (py - oy) * dy
    if t <= 0.0:
        return math.hypot(px - ox, py - oy)
    return abs(dx * (py - oy) - dy * (px - ox))


@njit(cache=True)
def min_ray_distance(rays, px, py):
    best = np.inf
    for k in range(rays.shape[0]):
        dist = ray_distance(rays[k, 0], rays[k, 1], rays[k, 2], rays[k, 3], px, py)
        if dist < best:
            best = dist
    return best


@njit(cache=True)
def inside_polygon(vx, vy, px, py):
    n = vx.shape[0]
    if n < 3:
        return False
    for i in range(n):
        j = (i + 1) % n
        if (vx[j] - vx[i]) * (py - vy[i]) - (vy[j] - vy[i]) * (px - vx[i]) <= 0.0:
            return False
    return True


@njit(cache=True, parallel=True)
def raster_depths(vx, vy, rays, xs, ys, depth, eps, window, tol):
    """Depth stamp per cell: first step index whose iterate is within eps of a
    singular ray, -1 when unmarked."""
    ny = ys.shape[0]
    nx = xs.shape[0]
    out = np.full((ny, nx), -1, np.int16)
    x0, y0, x1, y1 = window[0], window[1], window[2], window[3]
    for iy in prange(ny):
        for ix in range(nx):
            px = xs[ix]
            py = ys[iy]
            if inside_polygon(vx, vy, px, py):
                continue
            for k in range(depth + 1):
                if min_ray_distance(rays, px, py) < eps:
                    out[iy, ix] = k
                    break
                if k == depth:
                    break
                st, qx, qy, a, b, c, cx, cy, r = step_point(vx, vy, px, py, False, tol)
                if st != OK:
                    break
                px = qx
                py = qy
                if px < x0 or px > x1 or py < y0 or py > y1:
                    break
    return out


@njit(cache=True)
def apply_labels(vx, vy, px, py, labels, tol):
    """Apply the map once per row of ``labels`` (0-based vertex triples),
    stopping at the first step whose piece differs.

    Returns (status, index, x, y): status OK with index = len(labels) on
    success, NOT_FOUND with the failing index on a label mismatch, or the
    step's own failure status.
    """
    x = px
    y = py
    for k in range(labels.shape[0]):
        st, ox, oy, a, b, c, cx, cy, r = step_point(vx, vy, x, y, False, tol)
        if st != OK:
            return st, k, x, y
        if a != labels[k, 0] or b != labels[k, 1] or c != labels[k, 2]:
            return NOT_FOUND, k, x, y
        x = ox
        y = oy
    return OK, labels.shape[0], x, y


@njit(cache=True, parallel=True)
def apply_labels_batch(vx, vy, pts, labels, tol):
    m = pts.shape[0]
    status = np.empty(m, np.int64)
    index = np.empty(m, np.int64)
    out = np.empty((m, 2))
    for i in prange(m):
        st, k, x, y = apply_labels(vx, vy, pts[i, 0], pts[i, 1], labels, tol)
        status[i] = st
        index[i] = k
        out[i, 0] = x
        out[i, 1] = y
    return status, index, out


@njit(cache=True)
def ellipse_distance(a, b, y0, y1):
    """Distance from first-quadrant points (y0[k], y1[k]) to the axis-aligned
    ellipse x^2/a^2 + y^2/b^2 = 1 (a >= b).  Safeguarded Newton on the
    Lagrange parameter t of the closest point."""
    n = y0.shape[0]
    out = np.empty(n)
    a2 = a * a
    b2 = b * b
    for k in range(n):
        p = y0[k]
        q = y1[k]
        if q <= 1e-300 * a:
            thr = (a2 - b2) / a
            if p < thr:
                xin = a2 * p / (a2 - b2)
                out[k] = math.hypot(xin - p, b * math.sqrt(max(1.0 - (xin / a) ** 2, 0.0)))
            else:
                out[k] = abs(p - a)
            continue
        lo = -b2 + b * q
        hi = max(-b2 + math.hypot(a * p, b * q) + 1e-300, lo)
        t = 0.5 * (lo + hi)
        for _ in range(64):
            r0 = a * p / (t + a2)
            r1 = b * q / (t + b2)
            g = r0 * r0 + r1 * r1 - 1.0
            if g > 0:
                lo = t
            else:
                hi = t
            dg = -2.0 * (r0 * r0 / (t + a2) + r1 * r1 / (t + b2))
            tn = t - g / dg
            if not (tn > lo and tn < hi):
                tn = 0.5 * (lo + hi)
            if abs(tn - t) <= 1e-15 * max(abs(t), a2):
                t = tn
                break
            t = tn
        x0 = a2 * p / (t + a2)
        x1 = b2 * q / (t + b2)
        out[k] = math.hypot(x0 - p, x1 - q)
    return out
