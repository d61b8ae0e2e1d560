"""Large-radius behaviour: once-around orbits, the annulus bound, steadiness
census, steady-phase ellipses, and width / symmetrization / polar-dual
machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull

from .billiard import OrbitSample, Terminal, outer_area_step, step
from .errors import (
    IncompleteOrbit,
    NumericalDegeneracy,
    OriginOutside,
    PointInside,
    RadiusTooSmall,
    Singular,
)
from .geom import ConvexPolygon, EllipseFoci, Point2, as_point, ellipse_hausdorff, polygon_metrics
from .singularity import segment_crosses_ray, singular_rays

C2_FACTOR = 4 * math.pi + 11


def start_radius(P: ConvexPolygon) -> float:
    """C_2 = (4 pi + 11) d, the radius beyond which the annulus bound holds."""
    return C2_FACTOR * P.diameter


def annulus_bound(P: ConvexPolygon) -> float:
    """C_1 = 4p + 3d."""
    m = polygon_metrics(P)
    return 4 * m.perimeter + 3 * m.diameter


@dataclass
class OnceAroundOrbit:
    table: ConvexPolygon
    samples: list  # OrbitSample x_0 .. x_k; the last record may be a Terminal
    wrap_index: Optional[int]
    start_radius: float
    reference_angle: float
    terminal: Optional[Terminal] = None

    @property
    def complete(self) -> bool:
        return self.wrap_index is not None

    @property
    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.samples], float).reshape(-1, 2)

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(*self.points.T)

    def relative_angles(self) -> np.ndarray:
        """Polar angles in the frame where x_0 sits at theta = 0, in [-pi, pi)."""
        p = self.points
        a = np.arctan2(p[:, 1], p[:, 0]) - self.reference_angle
        return (a + math.pi) % (2 * math.pi) - math.pi


def _rel_angle(p, ref: float) -> float:
    a = math.atan2(p[1], p[0]) - ref
    return (a + math.pi) % (2 * math.pi) - math.pi


def once_around(P: ConvexPolygon, x, cap: int = 100_000) -> OnceAroundOrbit:
    """Orbit of x up to the first even iterate that wraps past the start ray.

    ``cap`` bounds the number of recorded samples x_0, x_1, ...; the orbit is
    incomplete (wrap_index None) when the cap or a singular point is reached
    first.  Arguments are taken in the frame where x has angle 0; an even
    iterate at angle exactly 0 counts as wrapped.
    """
    if not P.contains((0.0, 0.0), strict=False):
        raise OriginOutside("once-around orbits need the origin in the table")
    x = as_point(x)
    ref = math.atan2(x.y, x.x)
    R = x.norm()
    samples: list = []
    prev_even = 0.0
    cur = x
    k = 0
    while len(samples) < cap:
        try:
            rec = step(P, cur)
        except (PointInside, Singular, NumericalDegeneracy) as exc:
            term = Terminal(type(exc).__name__, cur)
            samples.append(OrbitSample(k, cur, term))
            return OnceAroundOrbit(P, samples, None, R, ref, term)
        samples.append(OrbitSample(k, cur, rec))
        if k > 0 and k % 2 == 0:
            th = _rel_angle(cur, ref)
            if prev_even > 0 and th <= 0:
                return OnceAroundOrbit(P, samples, k // 2, R, ref)
            prev_even = th
        cur = rec.y
        k += 1
    return OnceAroundOrbit(P, samples, None, R, ref, Terminal("Cap", cur))


def annulus_stats(o: OnceAroundOrbit) -> tuple[float, float, bool]:
    """(max | |x_i| - R |, C_1 = 4p + 3d, whether the bound holds)."""
    if not o.complete:
        raise IncompleteOrbit("annulus statistics need a wrapped orbit")
    dev = float(np.abs(o.radii - o.start_radius).max())
    c1 = annulus_bound(o.table)
    return dev, c1, dev <= c1


def _records(o: OnceAroundOrbit):
    return [s.record for s in o.samples if not isinstance(s.record, Terminal)]


def _crossing_predicate(recs, i: int, rule: str) -> bool:
    """Whether segment x_i x_{i+2} is expected to cross a side extension."""
    if rule == "literal":
        return not recs[i].steady
    if rule == "either":
        return not recs[i].steady or not recs[i + 1].steady
    raise ValueError(f"unknown rule {rule!r}")


def crossing_mismatches(o: OnceAroundOrbit, min_radius: float = 0.0, rule: str = "literal") -> list[int]:
    """Indices i (with |x_i| >= min_radius and x_{i+2} in the orbit) where the
    crossing of x_i x_{i+2} with the 2n side-extension rays disagrees with the
    steadiness rule.

    ``literal``: crossing iff x_i is unsteady.  ``either``: crossing iff x_i or
    x_{i+1} is unsteady, which is what the vertex bookkeeping r_i = l_{i+1}
    forces: x_i and x_{i+2} see the same vertex pair exactly when both x_i
    and x_{i+1} are steady.
    """
    recs = _records(o)
    rays = singular_rays(o.table, "all_extensions")
    pts = o.points
    bad = []
    for i in range(len(recs) - 1):
        if i + 2 >= len(pts) or math.hypot(*pts[i]) < min_radius:
            continue
        crosses = any(segment_crosses_ray(pts[i], pts[i + 2], ray) for ray in rays)
        if crosses != _crossing_predicate(recs, i, rule):
            bad.append(i)
    return bad


def steadiness_census(o: OnceAroundOrbit, rule: str = "literal",
                      min_radius_factor: float = 8.0) -> tuple[int, bool]:
    """(number of unsteady samples, crossing rule held at every sample)."""
    if not o.complete:
        raise IncompleteOrbit("census needs a wrapped orbit")
    d = o.table.diameter
    if o.radii.min() < min_radius_factor * d:
        raise RadiusTooSmall(
            f"orbit comes within {o.radii.min():.6g} of the origin, need {min_radius_factor}d")
    unsteady = sum(1 for r in _records(o) if not r.steady)
    return unsteady, not crossing_mismatches(o, 0.0, rule)


def steady_ellipse(P: ConvexPolygon, x) -> EllipseFoci:
    """Ellipse with the virtual-table endpoints as foci, through x."""
    rec = step(P, x)
    if rec.virtual_table is None:
        raise NumericalDegeneracy("virtual table is unbounded at this point")
    f1, f2 = rec.virtual_table
    return EllipseFoci.through(f1, f2, rec.x)


def obtuse_angles(o: OnceAroundOrbit, min_radius: float) -> list[tuple[int, float]]:
    """Angle x_i f_i x_{i+1} at each unsteady sample with |x_i| >= min_radius."""
    out = []
    for i, r in enumerate(_records(o)):
        if r.steady or r.virtual_table is None or r.x.norm() < min_radius:
            continue
        f = np.asarray(r.virtual_table[0])
        a = np.asarray(r.x) - f
        b = np.asarray(r.y) - f
        ang = math.atan2(abs(a[0] * b[1] - a[1] * b[0]), a @ b)
        out.append((i, ang))
    return out


def ellipse_jumps(o: OnceAroundOrbit, min_radius: float = 0.0, samples: int = 1024):
    """For each unsteady x_i (|x_i| >= min_radius) with a successor record:
    (i, d_H(E_i, E_{i+1}), 2 |l_i r_{i+1}|)."""
    recs = _records(o)
    P = o.table
    out = []
    for i in range(len(recs) - 1):
        r, r1 = recs[i], recs[i + 1]
        if r.steady or r.x.norm() < min_radius:
            continue
        if r.virtual_table is None or r1.virtual_table is None:
            continue
        E0 = EllipseFoci.through(*r.virtual_table, r.x)
        E1 = EllipseFoci.through(*r1.virtual_table, r1.x)
        bound = 2 * math.dist(P.vertex(r.l), P.vertex(r1.r))
        out.append((i, ellipse_hausdorff(E0, E1, samples), bound))
    return out


# --- width, symmetrization and the polar dual ---------------------------


def _require_origin(P: ConvexPolygon):
    if not P.contains((0.0, 0.0)):
        raise OriginOutside("origin must lie inside the table")


def support(P: ConvexPolygon, theta):
    """Support function h(theta) = max <v, (cos theta, sin theta)>."""
    _require_origin(P)
    return P.support(theta)


def width(P: ConvexPolygon, theta):
    """w(theta) = h(theta + pi/2) + h(theta - pi/2): the extent of P along the
    direction theta + pi/2."""
    th = np.asarray(theta, float)
    return P.support(th + math.pi / 2) + P.support(th - math.pi / 2)


def dual_radial(P: ConvexPolygon, theta):
    """Radial function 2 / w(theta) of the polar dual of the symmetrized body."""
    _require_origin(P)
    return 2.0 / width(P, theta)


def symmetrize(P: ConvexPolygon) -> ConvexPolygon:
    """The centrally symmetric body (P - P) / 2 as a polygon."""
    v = P.vertices
    diffs = (v[:, None, :] - v[None, :, :]).reshape(-1, 2) / 2.0
    if P.n == 2:
        return ConvexPolygon([diffs[1], diffs[2]])
    hull = ConvexHull(diffs)
    pts = diffs[hull.vertices]  # counter-clockwise for 2-D hulls
    return ConvexPolygon(pts)


@dataclass
class WidthProfile:
    table: ConvexPolygon
    theta: np.ndarray
    h: np.ndarray
    w: np.ndarray

    @classmethod
    def of(cls, P: ConvexPolygon, samples: int = 4096) -> "WidthProfile":
        th = np.linspace(-math.pi, math.pi, samples, endpoint=False)
        return cls(P, th, P.support(th), width(P, th))


def dual_curve(P: ConvexPolygon, samples: int = 4096) -> np.ndarray:
    """Points Gamma(theta) (cos theta, sin theta) of the dual curve."""
    th = np.linspace(-math.pi, math.pi, samples, endpoint=False)
    g = dual_radial(P, th)
    return np.c_[g * np.cos(th), g * np.sin(th)]


@dataclass
class NecklaceFit:
    deviation: float
    scale: float
    best_rotation: float
    best_rotation_deviation: float
    points: np.ndarray


def area_orbit_revolution(P: ConvexPolygon, R: float, angle: float = 0.1, cap: int = 1_000_000) -> np.ndarray:
    """Outer area billiard orbit from radius R until the accumulated polar
    angle of the even iterates completes one turn."""
    x = Point2(R * math.cos(angle), R * math.sin(angle))
    pts = [x]
    turned = 0.0
    prev = math.atan2(x.y, x.x)
    for k in range(1, cap):
        x = outer_area_step(P, x)
        pts.append(x)
        if k % 2 == 0:
            a = math.atan2(x.y, x.x)
            turned += (a - prev + math.pi) % (2 * math.pi) - math.pi
            prev = a
            if abs(turned) >= 2 * math.pi:
                break
    return np.array(pts, float)


def area_necklace_compare(P: ConvexPolygon, R: float, samples: int = 4096, angle: float = 0.1) -> NecklaceFit:
    """Sup relative deviation between a distant area-billiard orbit and the
    best homothetic copy of the dual curve.

    The scale is the least-squares fit of the orbit radii by lambda * Gamma;
    a rotation of the dual curve is scanned on a ``samples`` grid and only
    reported.
    """
    _require_origin(P)
    pts = area_orbit_revolution(P, R, angle)
    r = np.hypot(*pts.T)
    th = np.arctan2(pts[:, 1], pts[:, 0])

    def fit(rot):
        g = dual_radial(P, th - rot)
        lam = float((r * g).sum() / (g * g).sum())
        return float(np.abs(r / (lam * g) - 1).max()), lam

    dev, lam = fit(0.0)
    rots = np.linspace(-math.pi / 2, math.pi / 2, max(samples // 16, 8), endpoint=False)
    devs = [fit(a)[0] for a in rots]
    k = int(np.argmin(devs))
    return NecklaceFit(dev, lam, float(rots[k]), float(devs[k]), pts)
