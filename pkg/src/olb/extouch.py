"""Extouch triangles: the direct excircle construction, the inverse side-length
solver, and placement of the parent triangle as a 3-periodic orbit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .billiard import image
from .errors import BracketFailure, Degenerate
from .geom import ConvexPolygon

# area normalisation in yz (x^2 - a^2) = KAPPA |R|^2
KAPPA = 4.0


@dataclass(frozen=True)
class TriangleSides:
    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if min(a, b, c) <= 0:
            raise ValueError("side lengths must be positive")
        if not (a + b > c and b + c > a and c + a > b):
            raise ValueError(f"({a}, {b}, {c}) violates the triangle inequality")

    @classmethod
    def of(cls, tri) -> "TriangleSides":
        """Sides opposite the first, second and third vertex."""
        A, B, C = np.asarray(tri, float)
        return cls(float(np.hypot(*(B - C))), float(np.hypot(*(C - A))), float(np.hypot(*(A - B))))

    def as_tuple(self):
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class ParentSolution:
    x: float
    y: float
    z: float
    root_bracket: tuple[float, float]
    residual: float


def _area2(tri) -> float:
    A, B, C = np.asarray(tri, float)
    return float((B[0] - A[0]) * (C[1] - A[1]) - (B[1] - A[1]) * (C[0] - A[0]))


def extouch_of(R) -> np.ndarray:
    """Touch points of the three excircles with the sides of R = (X, Y, Z).

    Row k is the point on the side opposite vertex k, found by dropping the
    matching excentre onto that side.
    """
    R = np.asarray(R, float).reshape(3, 2)
    sides = TriangleSides.of(R) if _nondegenerate(R) else None
    if sides is None:
        raise Degenerate("collinear triangle")
    x, y, z = sides.as_tuple()
    X, Y, Z = R
    w = np.array([[-x, y, z], [x, -y, z], [x, y, -z]])
    out = np.empty((3, 2))
    for k in range(3):
        I = (w[k] @ R) / w[k].sum()
        P, Q = R[(k + 1) % 3], R[(k + 2) % 3]
        e = Q - P
        t = (I - P) @ e / (e @ e)
        out[k] = P + t * e
    return out


def _nondegenerate(R) -> bool:
    R = np.asarray(R, float)
    scale = max(float(np.ptp(R[:, 0])), float(np.ptp(R[:, 1])), 1e-300)
    return abs(_area2(R)) > 1e-12 * scale * scale


def extouch_sides(sides: TriangleSides) -> TriangleSides:
    """Side lengths of the extouch triangle from tangent lengths alone."""
    x, y, z = sides.as_tuple()
    s = (x + y + z) / 2

    def around(adj1, adj2, opp):
        # law of cosines at the vertex between the two adjacent sides
        cos = (adj1 ** 2 + adj2 ** 2 - opp ** 2) / (2 * adj1 * adj2)
        t1, t2 = s - adj1, s - adj2
        return math.sqrt(max(t1 * t1 + t2 * t2 - 2 * t1 * t2 * cos, 0.0))

    return TriangleSides(around(y, z, x), around(z, x, y), around(x, y, z))


def y_of(x: float, a: float, b: float) -> float:
    """Side y as a function of x, from yz (x^2 - a^2) = zx (y^2 - b^2)."""
    u = x * x - a * a
    return (u + math.sqrt(x ** 4 + 2 * (2 * b * b - a * a) * x * x + a ** 4)) / (2 * x)


def residual_f(x: float, T: TriangleSides, kappa: float = KAPPA) -> float:
    a, b, c = T.as_tuple()
    y = y_of(x, a, b)
    z = y_of(x, a, c)
    S = (x + y + z) / 2
    return y * z * (x * x - a * a) - kappa * S * (S - x) * (S - y) * (S - z)


def solve_parent(T: TriangleSides, kappa: float = KAPPA, rtol: float = 1e-13) -> ParentSolution:
    """Sides (x, y, z) of the triangle whose extouch triangle has sides T.

    Side a of T is the extouch side around the vertex opposite x.
    """
    a = T.a
    lo = a * (1 + 1e-12)
    hi = 2 * max(T.as_tuple())
    f_lo = residual_f(lo, T, kappa)
    if not f_lo < 0:
        raise BracketFailure(f"f(a) = {f_lo} is not negative")
    for _ in range(200):
        if residual_f(hi, T, kappa) > 0:
            break
        hi *= 2
    else:
        raise BracketFailure("no sign change found")
    x = brentq(residual_f, lo, hi, args=(T, kappa), xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=200)
    y = y_of(x, T.a, T.b)
    z = y_of(x, T.a, T.c)
    return ParentSolution(x, y, z, (lo, hi), abs(residual_f(x, T, kappa)))


def triangle_from_sides(x: float, y: float, z: float) -> np.ndarray:
    """Counter-clockwise triangle (X, Y, Z) with |YZ| = x, |ZX| = y, |XY| = z."""
    X = np.array([0.0, 0.0])
    Y = np.array([z, 0.0])
    cx = (z * z + y * y - x * x) / (2 * z)
    Z = np.array([cx, math.sqrt(max(y * y - cx * cx, 0.0))])
    return np.array([X, Y, Z])


def _procrustes(src, dst):
    """Best rigid motion (rotation or reflection, plus translation) taking src to dst."""
    ms, md = src.mean(0), dst.mean(0)
    H = (src - ms).T @ (dst - md)
    U, _, Vt = np.linalg.svd(H)
    Rm = (U @ Vt).T
    return Rm, md - ms @ Rm.T


def place_parent(Q) -> tuple[np.ndarray, float]:
    """Parent triangle R of Q placed so that extouch_of(R) lands on Q, and the
    largest |T^3(V) - V| over R's vertices for the billiard around Q."""
    Q = np.asarray(Q, float).reshape(3, 2)
    if not _nondegenerate(Q):
        raise Degenerate("collinear triangle")
    sol = solve_parent(TriangleSides.of(Q))
    R0 = triangle_from_sides(sol.x, sol.y, sol.z)
    E0 = extouch_of(R0)
    Rm, t = _procrustes(E0, Q)
    R = R0 @ Rm.T + t
    table = ConvexPolygon(Q if _area2(Q) > 0 else Q[::-1])
    defect = max(math.dist(image(table, V, 3), V) for V in R)
    return R, defect
