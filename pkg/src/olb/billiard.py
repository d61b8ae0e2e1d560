"""The outer length billiard map, its inverse, the segment-table closed form,
the outer area map and a finite-difference criticality check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import _kernel as K
from .errors import Collinear, NoSolution, NumericalDegeneracy, PointInside, Singular
from .geom import Circle, ConvexPolygon, DirectedLine, Point2, as_point, cross


@dataclass(frozen=True)
class StepRecord:
    """Everything produced by one application of the map ``y = T(x)``.

    Lines are oriented with the table on their left.  ``l`` is the contact
    vertex of ``l1`` and ``r`` the tangency vertex ``p`` (contact of ``l2``).
    """

    x: Point2
    y: Point2
    l1: DirectedLine
    l2: DirectedLine
    l3: DirectedLine
    p: Point2
    circle: Circle
    piece_label: tuple[int, int, int]
    steady: bool
    virtual_table: Optional[tuple[Point2, Point2]]
    l: int
    r: int

    @property
    def third_vertex(self) -> int:
        return self.piece_label[2]


@dataclass(frozen=True)
class Terminal:
    reason: str
    point: Optional[Point2] = None


@dataclass(frozen=True)
class OrbitSample:
    index: int
    point: Point2
    record: StepRecord


@dataclass
class Orbit:
    """Sequence of orbit samples plus the reason iteration stopped."""

    samples: list
    terminal: Terminal

    def __len__(self):
        return len(self.samples)

    def __iter__(self) -> Iterator[OrbitSample]:
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def points(self) -> np.ndarray:
        pts = [s.point for s in self.samples]
        if self.terminal.point is not None:
            pts.append(self.terminal.point)
        return np.array(pts, float).reshape(-1, 2)


def _raise_for(status: int, pt) -> None:
    if status == K.INSIDE:
        raise PointInside(f"{tuple(pt)} is not outside the table")
    if status == K.SINGULAR:
        raise Singular(f"map undefined at {tuple(pt)}")
    raise NumericalDegeneracy(f"{K.STATUS_NAMES[status]} construction at {tuple(pt)}")


def _record(P: ConvexPolygon, x, y, i1, i2, i3, cx, cy, r) -> StepRecord:
    q = P.vertex(i1)
    p = P.vertex(i2)
    q3 = P.vertex(i3)
    l1 = DirectedLine.through(q, x)
    l2 = DirectedLine.through(x, p)
    l3 = DirectedLine.through(y, q3)
    steady = i1 == i3
    if steady:
        vt = (q, p)
    else:
        try:
            vt = (l1.intersect(l3), p)
        except NoSolution:
            vt = None  # l1 and l3 parallel: the virtual table is unbounded
    return StepRecord(
        x=x, y=y, l1=l1, l2=l2, l3=l3, p=p, circle=Circle(Point2(cx, cy), r),
        piece_label=(int(i1), int(i2), int(i3)), steady=steady,
        virtual_table=vt, l=int(i1), r=int(i2),
    )


def step(P: ConvexPolygon, x) -> StepRecord:
    """Apply the outer length billiard map once."""
    x = as_point(x)
    st, yx, yy, i1, i2, i3, cx, cy, r = K.step_point(P._vx, P._vy, x.x, x.y, False, P.tol)
    if st != K.OK:
        _raise_for(st, x)
    return _record(P, x, Point2(yx, yy), i1, i2, i3, cx, cy, r)


def step_inverse(P: ConvexPolygon, y) -> StepRecord:
    """Preimage of ``y``, returned as the forward record whose image is ``y``."""
    y = as_point(y)
    st, xx, xy, j_other, ip, j_new, cx, cy, r = K.step_point(P._vx, P._vy, y.x, y.y, True, P.tol)
    if st != K.OK:
        _raise_for(st, y)
    return _record(P, Point2(xx, xy), y, j_new, ip, j_other, cx, cy, r)


def image(P: ConvexPolygon, x, n: int = 1) -> Point2:
    """T^n(x) (negative n iterates the inverse) without building records."""
    px, py = as_point(x)
    rev = n < 0
    for _ in range(abs(n)):
        st, px, py, *_ = K.step_point(P._vx, P._vy, px, py, rev, P.tol)
        if st != K.OK:
            _raise_for(st, (px, py))
    return Point2(px, py)


def step_many(P: ConvexPolygon, pts, reverse: bool = False):
    """Vectorised map.  Returns (status, images, labels, circles) arrays."""
    pts = np.ascontiguousarray(np.asarray(pts, float).reshape(-1, 2))
    return K.step_batch(P._vx, P._vy, pts, reverse, P.tol)


def orbit(P: ConvexPolygon, x0, n_max: int, stop_radius: float = math.inf) -> Orbit:
    """Iterate ``step`` up to ``n_max`` times; stop reasons are data."""
    x = as_point(x0)
    samples = []
    for i in range(n_max):
        try:
            rec = step(P, x)
        except PointInside:
            return Orbit(samples, Terminal("PointInside", x))
        except Singular:
            return Orbit(samples, Terminal("Singular", x))
        except NumericalDegeneracy:
            return Orbit(samples, Terminal("NumericalDegeneracy", x))
        samples.append(OrbitSample(i, x, rec))
        x = rec.y
        if x.norm() > stop_radius:
            return Orbit(samples, Terminal("StopRadius", x))
    return Orbit(samples, Terminal("MaxSteps", x))


def orbit_points(P: ConvexPolygon, x0, n: int, stop_radius: float = math.inf):
    """Fast orbit of up to n steps; returns (points array, stop status name)."""
    x = as_point(x0)
    pts, count, st = K.orbit_points(P._vx, P._vy, x.x, x.y, int(n), float(stop_radius), P.tol)
    name = "stop_radius" if st == -1 else K.STATUS_NAMES[st]
    if st not in (-1, K.OK):
        count -= 1  # the last stored point is the one that failed to step
        return pts[: count + 1], name
    return pts[:count], name


def segment_step(f1, f2, x) -> Point2:
    """Closed-form map around the segment f1 f2.

    The image is the second intersection of the forward support line with the
    ellipse through ``x`` with foci f1, f2.
    """
    f1, f2, x = as_point(f1), as_point(f2), as_point(x)
    c = cross(x, f1, f2)
    scale = max(1.0, x.norm(), f1.norm(), f2.norm())
    if abs(c) <= 1e-12 * scale * scale:
        raise Collinear(f"{tuple(x)} is collinear with the segment")
    # forward tangency vertex: the endpoint with the other one on its left
    p = f1 if cross(x, f1, f2) > 0 else f2
    ctr = (f1 + f2).scale(0.5)
    a = (x - f1).norm() / 2 + (x - f2).norm() / 2
    fh = (f2 - f1).norm() / 2
    b2 = (a - fh) * (a + fh)
    ang = math.atan2(f2.y - f1.y, f2.x - f1.x)
    cs, sn = math.cos(ang), math.sin(ang)

    def local(v):
        return cs * v[0] + sn * v[1], -sn * v[0] + cs * v[1]

    X = local(x - ctr)
    D = local(p - x)
    s = -2 * (X[0] * D[0] / (a * a) + X[1] * D[1] / b2) / (D[0] ** 2 / (a * a) + D[1] ** 2 / b2)
    return Point2(x.x + s * (p.x - x.x), x.y + s * (p.y - x.y))


def outer_area_step(P: ConvexPolygon, x, reverse: bool = False) -> Point2:
    """Classical outer billiard: reflect ``x`` through its support vertex."""
    x = as_point(x)
    st, yx, yy, _ = K.area_step_point(P._vx, P._vy, x.x, x.y, reverse, P.tol)
    if st != K.OK:
        _raise_for(st, x)
    return Point2(yx, yy)


def _broken_length(rec: StepRecord, z: Point2, phi: float) -> float:
    """Length of the broken line l - x - y - z after rotating l2 by ``phi``
    about p, with l1 and l3 held fixed."""
    c, s = math.cos(phi), math.sin(phi)
    d = rec.l2.direction
    l2 = DirectedLine(rec.p, Point2(c * d.x - s * d.y, s * d.x + c * d.y))
    xp = rec.l1.intersect(l2)
    yp = l2.intersect(rec.l3)
    anchor = rec.l1.origin  # contact vertex of l1
    return (xp - anchor).norm() + (yp - xp).norm() + (z - yp).norm()


def variational_residual(P: ConvexPolygon, x, h: float = 1e-5, phi0: float = 0.0) -> float:
    """|dL/dphi| at ``phi0`` by Richardson-refined central differences.

    L is the length of the circumscribed broken line through the corners
    x = T^0, y = T(x) (recomputed as line intersections) ending at T^2(x).
    """
    rec = step(P, x)
    z = step(P, rec.y).y

    def D(hh):
        return (_broken_length(rec, z, phi0 + hh) - _broken_length(rec, z, phi0 - hh)) / (2 * hh)

    return abs((4 * D(h / 2) - D(h)) / 3)
