"""Dynamics of the auxiliary circle centres: the centre map chi, recovering a
chord from a centre, the midpoint witness and the dual-curve experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import C2_FACTOR, dual_radial, once_around, width
from .billiard import step, step_inverse
from .errors import Ambiguous, DTooLarge, NearestPointOnEdge, NotFound, PointInside
from .geom import Circle, ConvexPolygon, DirectedLine, Point2, as_point, common_support_lines, support_contacts


@dataclass(frozen=True)
class CenterSample:
    x: Point2
    center: Point2
    radius: float
    phi: float
    p: Point2


def _angle_between(a, b) -> float:
    return math.atan2(abs(a[0] * b[1] - a[1] * b[0]), a[0] * b[0] + a[1] * b[1])


def chi(P: ConvexPolygon, x) -> CenterSample:
    """Centre and radius of the auxiliary circle at x, with the opening angle
    of the two support lines through x."""
    rec = step(P, x)
    q = P.vertex(rec.l)
    phi = _angle_between(q - rec.x, rec.p - rec.x)
    return CenterSample(rec.x, rec.circle.center, rec.circle.radius, phi, rec.p)


def nearest_vertex(P: ConvexPolygon, c) -> tuple[int, bool]:
    """(index of the vertex nearest to c, whether that nearest vertex is tied)."""
    d2 = ((P.vertices - np.asarray(c, float)) ** 2).sum(1)
    i = int(np.argmin(d2))
    tied = int(np.sum(d2 == d2[i])) > 1
    return i, tied


def _nearest_on_edge(P: ConvexPolygon, c, dv2: float) -> bool:
    v = P.vertices
    c = np.asarray(c, float)
    edges = range(1) if P.n == 2 else range(P.n)
    for i in edges:
        a, b = v[i], v[(i + 1) % P.n]
        e = b - a
        t = float((c - a) @ e / (e @ e))
        if 0.0 < t < 1.0:
            f = a + t * e
            if float(((c - f) ** 2).sum()) < dv2 * (1 - 1e-12):
                return True
    return False


def chord_from_center(P: ConvexPolygon, c) -> tuple[Point2, Point2]:
    """Recover (x, T(x)) from the centre of the auxiliary circle.

    The circle about c through the nearest vertex v has two further common
    support lines with P; the tangent at v meets them at x and T(x), with x
    the one that sees v on its right.
    """
    c = as_point(c)
    if P.contains(c, strict=False):
        raise PointInside(f"{tuple(c)} is not outside the table")
    j, _ = nearest_vertex(P, c)
    v = P.vertex(j)
    dv2 = (c.x - v.x) ** 2 + (c.y - v.y) ** 2
    if _nearest_on_edge(P, c, dv2):
        raise NearestPointOnEdge(f"nearest boundary point to {tuple(c)} is inside an edge")
    C = Circle(c, math.sqrt(dv2))
    lines = [ln for ln, k in common_support_lines(P, C) if k != j]
    if len(lines) < 2:
        raise NotFound("fewer than two outer common support lines")
    if len(lines) > 2:
        raise Ambiguous(f"{len(lines)} outer common support lines")
    u = (v - c).scale(1 / math.sqrt(dv2))
    tangent = DirectedLine(v, Point2(-u.y, u.x))
    a, b = (tangent.intersect(ln) for ln in lines)
    for x, y in ((a, b), (b, a)):
        try:
            if support_contacts(P, x)[1] == j:
                return x, y
        except Exception:
            continue
    raise NotFound("neither intersection sees the nearest vertex on its right")


@dataclass(frozen=True)
class MidpointWitness:
    M: Point2
    v_plus: int
    v_minus: int
    defect: float
    degenerate: bool


def midpoint_bisector_witness(P: ConvexPolygon, x) -> MidpointWitness:
    """The midpoint of the forward and reverse circle centres and its distance
    defect to the vertices nearest those centres."""
    cp = step(P, x).circle.center
    cm = step_inverse(P, x).circle.center
    M = Point2((cp.x + cm.x) / 2, (cp.y + cm.y) / 2)
    vp, tp = nearest_vertex(P, cp)
    vm, tm = nearest_vertex(P, cm)
    defect = abs(math.dist(M, P.vertex(vp)) - math.dist(M, P.vertex(vm)))
    return MidpointWitness(M, vp, vm, defect, vp == vm or tp or tm)


@dataclass
class DualDeviation:
    sup_dev: float
    theta: np.ndarray
    centers: np.ndarray
    predicted: np.ndarray
    phi_defect: float
    radius_defect: float
    wrap_index: int


def dual_deviation(K: ConvexPolygon, d: float, x0_angle: float = 0.0, cap: int = 1_000_000) -> DualDeviation:
    """Compare the once-around centre cloud of the table dK, started on the
    unit circle, with Gamma(theta) (-sin theta, cos theta).

    Also reports max |phi - w(theta)| and max |rho - 2/w(theta)| over the orbit.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    limit = 1.0 / (C2_FACTOR * K.diameter)
    if d >= limit:
        raise DTooLarge(f"d = {d} must be below 1/C2 = {limit}")
    Q = K.scaled(d)
    o = once_around(Q, (math.cos(x0_angle), math.sin(x0_angle)), cap)
    if not o.complete:
        raise NotFound(f"once-around orbit did not wrap ({o.terminal})")
    recs = [s.record for s in o.samples]
    pts = o.points
    th = np.arctan2(pts[:, 1], pts[:, 0])
    ctr = np.array([r.circle.center for r in recs])
    rad = np.array([r.circle.radius for r in recs])
    g = dual_radial(Q, th)
    pred = np.c_[-g * np.sin(th), g * np.cos(th)]
    w = width(Q, th)
    phi = np.array([_angle_between(Q.vertex(r.l) - r.x, r.p - r.x) for r in recs])
    return DualDeviation(
        sup_dev=float(np.hypot(*(ctr - pred).T).max()),
        theta=th, centers=ctr, predicted=pred,
        phi_defect=float(np.abs(phi - w).max()),
        radius_defect=float(np.abs(rad - 2.0 / w).max()),
        wrap_index=int(o.wrap_index),
    )


def rasterize_cloud(pts, resolution: int = 256, extent: float | None = None) -> np.ndarray:
    """Boolean raster of a point cloud on a square grid centred at the origin,
    with consecutive angle-sorted points joined by straight strokes."""
    pts = np.asarray(pts, float)
    if extent is None:
        extent = 1.05 * float(np.abs(pts).max())
    order = np.argsort(np.arctan2(pts[:, 1], pts[:, 0]), kind="stable")
    p = pts[order]
    p = np.vstack([p, p[:1]])
    img = np.zeros((resolution, resolution), bool)
    scale = resolution / (2 * extent)
    for a, b in zip(p[:-1], p[1:]):
        m = int(max(2, math.ceil(math.dist(a, b) * scale * 2)))
        s = np.linspace(0.0, 1.0, m)[:, None]
        q = (a + s * (b - a) + extent) * scale
        ij = np.clip(q.astype(int), 0, resolution - 1)
        img[ij[:, 1], ij[:, 0]] = True
    return img


def rotational_symmetry_score(img: np.ndarray, order: int = 6, slack: int = 1) -> float:
    """Mean fraction of marked cells that land within ``slack`` cells of a
    marked cell after rotation by 2 pi k / order about the raster centre."""
    n = img.shape[0]
    iy, ix = np.nonzero(img)
    c = (n - 1) / 2.0
    grown = img.copy()
    for dy in range(-slack, slack + 1):
        for dx in range(-slack, slack + 1):
            grown |= np.roll(np.roll(img, dy, 0), dx, 1)
    scores = []
    for k in range(1, order):
        a = 2 * math.pi * k / order
        ca, sa = math.cos(a), math.sin(a)
        x = ix - c
        y = iy - c
        rx = np.rint(ca * x - sa * y + c).astype(int)
        ry = np.rint(sa * x + ca * y + c).astype(int)
        ok = (rx >= 0) & (ry >= 0) & (rx < n) & (ry < n)
        hit = np.zeros(len(ix), bool)
        hit[ok] = grown[ry[ok], rx[ok]]
        scores.append(float(hit.mean()) if len(hit) else 0.0)
    return float(np.mean(scores))
