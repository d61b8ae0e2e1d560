"""Planar primitives: points, directed lines, circles, convex polygons and
ellipses given by their foci."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernel as K
from .errors import (
    Ambiguous,
    EdgeAligned,
    InvalidPolygon,
    NoSolution,
    NotFound,
    OnSingularRay,
    PointInside,
)

# relative tolerance for every side-of-line predicate (times the diameter)
REL_TOL = 1e-9


class Point2(NamedTuple):
    x: float
    y: float

    def __sub__(self, other):
        return Point2(self.x - other[0], self.y - other[1])

    def __add__(self, other):
        return Point2(self.x + other[0], self.y + other[1])

    def scale(self, s: float) -> "Point2":
        return Point2(s * self.x, s * self.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def theta(self) -> float:
        """Polar angle in [-pi, pi)."""
        return polar_angle(self.x, self.y)


def as_point(p) -> Point2:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite point {p!r}")
    return Point2(x, y)


def polar_angle(x: float, y: float) -> float:
    a = math.atan2(y, x)
    return -math.pi if a >= math.pi else a


def dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def cross(o, a, b) -> float:
    """Twice the signed area of the triangle o, a, b (positive when CCW)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class DirectedLine:
    """An oriented line.  By convention the table lies on its left."""

    origin: Point2
    direction: Point2

    def __post_init__(self):
        n = math.hypot(*self.direction)
        if abs(n - 1.0) > 1e-12:
            object.__setattr__(self, "direction", Point2(self.direction[0] / n, self.direction[1] / n))

    @classmethod
    def through(cls, a, b) -> "DirectedLine":
        a = as_point(a)
        return cls(a, Point2(b[0] - a.x, b[1] - a.y))

    @property
    def left_normal(self) -> Point2:
        return Point2(-self.direction.y, self.direction.x)

    def signed_distance(self, p) -> float:
        """Positive on the left of the line."""
        return cross(self.origin, self.origin + self.direction, p)

    def reversed(self) -> "DirectedLine":
        return DirectedLine(self.origin, Point2(-self.direction.x, -self.direction.y))

    def intersect(self, other: "DirectedLine") -> Point2:
        d1, d2 = self.direction, other.direction
        den = d1.x * d2.y - d1.y * d2.x
        if den == 0.0:
            raise NoSolution("parallel lines")
        w = other.origin - self.origin
        s = (w.x * d2.y - w.y * d2.x) / den
        return self.origin + d1.scale(s)

    def same_line(self, other: "DirectedLine", tol: float = 1e-9) -> bool:
        """True for the same undirected line (within ``tol``)."""
        c = abs(self.direction.x * other.direction.y - self.direction.y * other.direction.x)
        return c < tol and abs(self.signed_distance(other.origin)) < tol * max(1.0, self.origin.norm())

    def project(self, p) -> Point2:
        t = (p[0] - self.origin.x) * self.direction.x + (p[1] - self.origin.y) * self.direction.y
        return self.origin + self.direction.scale(t)


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("circle radius must be positive")

    def line_gap(self, line: DirectedLine) -> float:
        """Distance from the centre to ``line`` minus the radius (0 when tangent)."""
        return abs(line.signed_distance(self.center)) - self.radius


class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices (n >= 2).

    Two vertices describe a segment table.
    """

    def __init__(self, vertices: Sequence[Sequence[float]]):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 2:
            raise InvalidPolygon("need at least two (x, y) vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidPolygon("vertices must be finite")
        n = len(v)
        if len({(float(a), float(b)) for a, b in v}) != n:
            raise InvalidPolygon("repeated vertices")
        if n >= 3:
            d = v[:, None, :] - v[None, :, :]
            diam = float(np.sqrt((d ** 2).sum(-1)).max())
            for i in range(n):
                o = cross(v[i - 1], v[i], v[(i + 1) % n])
                if o <= REL_TOL * diam * diam:
                    raise InvalidPolygon(f"vertex {i} breaks strict CCW convexity")
            # total turning must be one revolution (rules out star shapes)
            ang = np.arctan2(*np.roll(v - np.roll(v, 1, 0), -1, 0)[:, ::-1].T)
            turn = np.mod(np.diff(np.append(ang, ang[0])), 2 * math.pi).sum()
            if abs(turn - 2 * math.pi) > 1e-6:
                raise InvalidPolygon("vertices wind more than once")
        v.setflags(write=False)
        self._v = v
        self._vx = np.ascontiguousarray(v[:, 0])
        self._vy = np.ascontiguousarray(v[:, 1])
        d = v[:, None, :] - v[None, :, :]
        self._diameter = float(np.sqrt((d ** 2).sum(-1)).max())

    # builders
    @classmethod
    def square(cls, half: float = 1.0) -> "ConvexPolygon":
        """Square (+-half, +-half) with vertex i+1 in quadrant i+1."""
        h = float(half)
        return cls([(h, h), (-h, h), (-h, -h), (h, -h)])

    @classmethod
    def regular(cls, n: int, circumradius: float = 1.0, phase: float = math.pi / 2) -> "ConvexPolygon":
        k = np.arange(n)
        a = phase + 2 * math.pi * k / n
        return cls(np.c_[circumradius * np.cos(a), circumradius * np.sin(a)])

    @classmethod
    def segment(cls, a=(-1.0, 0.0), b=(1.0, 0.0)) -> "ConvexPolygon":
        return cls([a, b])

    @classmethod
    def kite(cls, a: float) -> "ConvexPolygon":
        return cls([(a, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)])

    @classmethod
    def random(cls, n: int, seed=None, min_gap: float = 0.15) -> "ConvexPolygon":
        """Random strictly convex n-gon: sorted angles on a circle, then a random
        linear stretch.  Contains the origin."""
        rng = np.random.default_rng(seed)
        while True:
            a = np.sort(rng.uniform(0, 2 * math.pi, n))
            gaps = np.diff(np.append(a, a[0] + 2 * math.pi))
            if gaps.min() > min_gap and gaps.max() < math.pi - min_gap:
                break
        pts = np.c_[np.cos(a), np.sin(a)]
        A = np.array([[1.0, 0.0], [0.0, 1.0]]) + rng.uniform(-0.3, 0.3, (2, 2))
        if np.linalg.det(A) < 0:
            A[:, 0] *= -1
        return cls(pts @ A.T)

    # accessors
    @property
    def vertices(self) -> np.ndarray:
        return self._v

    @property
    def n(self) -> int:
        return len(self._v)

    @property
    def diameter(self) -> float:
        return self._diameter

    @property
    def tol(self) -> float:
        return REL_TOL * self._diameter

    def vertex(self, i: int) -> Point2:
        return Point2(float(self._v[i, 0]), float(self._v[i, 1]))

    def scaled(self, s: float) -> "ConvexPolygon":
        return ConvexPolygon(self._v * s)

    def transformed(self, A, b=(0.0, 0.0)) -> "ConvexPolygon":
        A = np.asarray(A, float)
        v = self._v @ A.T + np.asarray(b, float)
        if np.linalg.det(A) < 0:
            v = v[::-1]
        return ConvexPolygon(v)

    def contains(self, p, strict: bool = True) -> bool:
        """Interior test; ``strict=False`` also accepts the boundary (for a
        segment table, the segment itself)."""
        if self.n < 3:
            if strict:
                return False
            a, b = self._v
            e = b - a
            t = min(max(float((np.asarray(p, float) - a) @ e / (e @ e)), 0.0), 1.0)
            return bool(np.hypot(*(np.asarray(p, float) - a - t * e)) <= self.tol)
        s = np.empty(self.n)
        K.edge_distances(self._vx, self._vy, float(p[0]), float(p[1]), s)
        return bool(np.all(s > 0)) if strict else bool(np.all(s >= -self.tol))

    def support(self, theta) -> np.ndarray:
        """h(theta) = max over vertices of <v, (cos, sin)>; vectorised over theta."""
        th = np.asarray(theta, float)
        u = np.stack([np.cos(th), np.sin(th)], -1)
        return (u @ self._v.T).max(-1)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"ConvexPolygon({self._v.tolist()!r})"

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and np.array_equal(self._v, other._v)

    def __hash__(self):
        return hash(self._v.tobytes())


@dataclass(frozen=True)
class PolygonMetrics:
    diameter: float
    perimeter: float
    min_width: float
    aspect_ratio: float
    contains_origin: bool


def polygon_metrics(P: ConvexPolygon) -> PolygonMetrics:
    v = P.vertices
    e = np.roll(v, -1, 0) - v
    if P.n == 2:
        perimeter = 2 * float(np.hypot(*e[0]))
        min_width = 0.0
    else:
        perimeter = float(np.hypot(e[:, 0], e[:, 1]).sum())
        # minimum width is attained perpendicular to an edge
        widths = []
        for i in range(P.n):
            nrm = np.array([e[i, 1], -e[i, 0]]) / np.hypot(*e[i])
            widths.append(float(((v - v[i]) @ nrm).min() * -1))
        min_width = min(widths)
    d = P.diameter
    k = d / min_width if min_width > 0 else math.inf
    return PolygonMetrics(d, perimeter, min_width, k, P.contains((0.0, 0.0)))


def support_contacts(P: ConvexPolygon, x) -> tuple[int, int]:
    """Indices (left, right) of the two support vertices seen from ``x``.

    ``left`` is the contact of the support line on the viewer's left when
    looking at the table from ``x``.  The tangency vertex of the billiard
    construction is ``right``.
    """
    x = as_point(x)
    st, right, left, right_al, left_al = K.tangent_vertices(P._vx, P._vy, x.x, x.y, P.tol)
    if st == K.INSIDE:
        raise PointInside(f"{tuple(x)} is not outside the table")
    if st == K.SINGULAR or right_al:
        raise OnSingularRay(f"{tuple(x)} lies on a singular side extension")
    if left_al:
        raise EdgeAligned(f"{tuple(x)} is collinear with a side")
    return int(left), int(right)


def auxiliary_circle(l1: DirectedLine, l2: DirectedLine, p) -> Circle:
    """Circle tangent to ``l2`` exactly at ``p`` on its non-table (right) side
    and tangent to ``l1`` on its table (left) side."""
    p = as_point(p)
    n = Point2(-l2.left_normal.x, -l2.left_normal.y)
    m = l1.left_normal
    t = K.aux_circle(p.x, p.y, n.x, n.y, l1.origin.x, l1.origin.y, m.x, m.y)
    if not t > 0:
        raise NoSolution("no circle tangent to both lines with the required sides")
    return Circle(p + n.scale(t), t)


def common_support_lines(P: ConvexPolygon, C: Circle) -> list[tuple[DirectedLine, int]]:
    """All lines tangent to ``C`` through a vertex of ``P`` with both bodies on
    their left.  Lines containing an edge are reported once."""
    cands = []
    v = P.vertices
    for j in range(P.n):
        w = v[j] - np.asarray(C.center)
        d2 = float(w @ w)
        ss = d2 - C.radius ** 2
        if ss <= 1e-12 * d2:
            continue
        s = math.sqrt(ss)
        for sgn in (1.0, -1.0):
            u = (C.radius * w + sgn * s * np.array([-w[1], w[0]])) / d2
            u /= np.hypot(*u)
            if np.all((v - v[j]) @ u <= P.tol):
                line = DirectedLine(Point2(*v[j]), Point2(-u[1], u[0]))
                if not any(line.same_line(c[0], 1e-9) for c in cands):
                    cands.append((line, j))
    return cands


def third_support_line(P: ConvexPolygon, C: Circle, exclude: Sequence[DirectedLine]) -> tuple[DirectedLine, int]:
    """The common support line of ``C`` and ``P`` that is not one of
    ``exclude``; returns the line and its contact vertex index."""
    cands = [
        c for c in common_support_lines(P, C)
        if not any(c[0].same_line(ex, 1e-9) for ex in exclude)
    ]
    if not cands:
        raise NotFound("no remaining common support line")
    if len(cands) > 1:
        raise Ambiguous(f"{len(cands)} candidate support lines")
    return cands[0]


# --- ellipses -------------------------------------------------------------


@dataclass(frozen=True)
class EllipseFoci:
    f1: Point2
    f2: Point2
    focal_sum: float

    def __post_init__(self):
        object.__setattr__(self, "f1", as_point(self.f1))
        object.__setattr__(self, "f2", as_point(self.f2))
        if not self.focal_sum > dist(self.f1, self.f2):
            raise ValueError("focal sum must exceed the focal distance")

    @classmethod
    def through(cls, f1, f2, p) -> "EllipseFoci":
        return cls(as_point(f1), as_point(f2), dist(f1, p) + dist(f2, p))

    @property
    def a(self) -> float:
        return self.focal_sum / 2

    @property
    def focal_half(self) -> float:
        return dist(self.f1, self.f2) / 2

    @property
    def b(self) -> float:
        f = self.focal_half
        return math.sqrt((self.a - f) * (self.a + f))

    @property
    def center(self) -> Point2:
        return Point2((self.f1.x + self.f2.x) / 2, (self.f1.y + self.f2.y) / 2)

    @property
    def angle(self) -> float:
        if self.f1 == self.f2:
            return 0.0
        return math.atan2(self.f2.y - self.f1.y, self.f2.x - self.f1.x)

    @property
    def eccentricity(self) -> float:
        return self.focal_half / self.a

    def level(self, pts) -> np.ndarray:
        """Focal-distance sum at each point (less than focal_sum inside)."""
        p = np.asarray(pts, float)
        return np.hypot(*(p - self.f1).T) + np.hypot(*(p - self.f2).T)

    def points(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        c, s = math.cos(self.angle), math.sin(self.angle)
        u = self.a * np.cos(t)
        w = self.b * np.sin(t)
        return np.stack([self.center.x + c * u - s * w, self.center.y + s * u + c * w], -1)

    def sample(self, n: int) -> np.ndarray:
        return self.points(np.linspace(0, 2 * math.pi, n, endpoint=False))

    def to_local(self, pts) -> np.ndarray:
        p = np.asarray(pts, float) - np.asarray(self.center)
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.stack([c * p[..., 0] + s * p[..., 1], -s * p[..., 0] + c * p[..., 1]], -1)

    def distance(self, pts) -> np.ndarray:
        """Exact Euclidean distance from each point to the ellipse curve."""
        q = np.abs(self.to_local(pts))
        return _ellipse_distance(self.a, self.b, q[..., 0], q[..., 1])


def _ellipse_distance(a, b, y0, y1):
    """Distance from first-quadrant points (y0, y1) to x^2/a^2 + y^2/b^2 = 1."""
    y0, y1 = np.broadcast_arrays(np.asarray(y0, float), np.asarray(y1, float))
    if a - b <= 1e-15 * a:
        return np.abs(np.hypot(y0, y1) - a)
    flat = K.ellipse_distance(float(a), float(b), np.ascontiguousarray(y0.ravel()), np.ascontiguousarray(y1.ravel()))
    return flat.reshape(y0.shape)


def ellipse_radial_extremes(E: EllipseFoci) -> tuple[float, float]:
    """(min, max) distance from the origin to the points of ``E``."""
    r0 = E.center.norm()
    if E.f1 == E.f2:
        return abs(r0 - E.a), r0 + E.a
    # coarse grid plus the axis crossings, then bounded refinement
    ts = np.concatenate([np.linspace(0, 2 * math.pi, 64, endpoint=False),
                         [math.pi / 4 * k for k in range(8)]])
    vals = (E.points(ts) ** 2).sum(-1)
    h = 2 * math.pi / 64

    def refine(sign):
        t0 = ts[int(np.argmin(sign * vals))]
        opt = minimize_scalar(
            lambda t: sign * float((E.points(t) ** 2).sum()),
            bounds=(t0 - h, t0 + h), method="bounded", options={"xatol": 1e-12},
        )
        return sign * opt.fun

    m2 = min(refine(1.0), float(vals.min()))
    M2 = max(refine(-1.0), float(vals.max()))
    return math.sqrt(max(m2, 0.0)), math.sqrt(M2)


def ellipse_hausdorff(E1: EllipseFoci, E2: EllipseFoci, samples: int = 1024) -> float:
    """Symmetric Hausdorff distance between two ellipse curves.

    Each curve is sampled densely and the exact point-to-curve distance to the
    other ellipse is taken at every sample.
    """
    if samples < 256:
        raise ValueError("samples must be at least 256")
    if E1 == E2:
        return 0.0
    d12 = E2.distance(E1.sample(samples)).max()
    d21 = E1.distance(E2.sample(samples)).max()
    return float(max(d12, d21))
