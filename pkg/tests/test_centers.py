import math

import numpy as np
import pytest

from conftest import valid_points
from olb import centers as C
from olb.asymptotics import dual_radial, width
from olb.billiard import step
from olb.errors import DTooLarge, NearestPointOnEdge, PointInside, Singular
from olb.geom import ConvexPolygon

SQ = ConvexPolygon.square()
PENT = ConvexPolygon.regular(5).scaled(1 / ConvexPolygon.regular(5).diameter)
TRI = ConvexPolygon.regular(3).scaled(1 / ConvexPolygon.regular(3).diameter)


def test_two_gon_center_on_normal_at_p():
    s = C.chi(ConvexPolygon.segment(), (0, 2))
    u = np.subtract(s.center, s.p)
    v = np.subtract(s.p, s.x)
    assert abs(u @ v) < 1e-12 * np.hypot(*u) * np.hypot(*v)
    assert s.radius == pytest.approx(math.dist(s.center, s.p), rel=1e-14)


def test_radius_tracks_dual_on_scaled_square():
    d = 1e-2
    Q = SQ.scaled(d / SQ.diameter)
    for t in np.linspace(0.05, 2 * math.pi, 11):
        s = C.chi(Q, (math.cos(t), math.sin(t)))
        assert abs(s.radius - 2 / float(width(Q, t))) <= 10


def test_chi_singular():
    with pytest.raises(Singular):
        C.chi(SQ, (3, 1))


def test_chord_round_trip(rng):
    for P in (SQ, ConvexPolygon.random(5, 8)):
        d = P.diameter
        for x in valid_points(P, 200, rng):
            rec = step(P, x)
            try:
                gx, gy = C.chord_from_center(P, rec.circle.center)
            except NearestPointOnEdge:
                continue
            assert math.dist(gx, x) <= 1e-8 * d * max(1, math.hypot(*x))
            assert math.dist(gy, rec.y) <= 1e-8 * d * max(1, math.hypot(*x))


def test_chord_errors():
    with pytest.raises(NearestPointOnEdge):
        C.chord_from_center(SQ, (0, 3))
    with pytest.raises(PointInside):
        C.chord_from_center(SQ, (0.1, 0.2))


def test_midpoint_witness_random_pentagons(rng):
    for seed in range(10):
        P = ConvexPolygon.random(5, seed)
        for x in valid_points(P, 50, rng):
            w = C.midpoint_bisector_witness(P, x)
            assert w.defect <= 1e-9 * P.diameter


def test_midpoint_on_square_axis():
    w = C.midpoint_bisector_witness(SQ, (5, 0))
    assert w.M.y == pytest.approx(0, abs=1e-12)
    assert {w.v_plus, w.v_minus} == {0, 3}  # side (1,1)-(1,-1), bisected by the x-axis
    assert w.defect <= 1e-12


def test_midpoint_degenerate_flag():
    seg = ConvexPolygon.segment()
    flags = [C.midpoint_bisector_witness(seg, (t, 2.0)) for t in (-3, 0.3, 4)]
    for w in flags:
        if w.v_plus == w.v_minus:
            assert w.degenerate


def test_nearest_vertex_ties():
    assert C.nearest_vertex(SQ, (0, 5))[1]
    assert C.nearest_vertex(SQ, (5, 4)) == (0, False)


@pytest.fixture(scope="module")
def pentagon_runs():
    return {d: C.dual_deviation(PENT, d) for d in (1e-2, 1e-3)}


def test_dual_deviation_bounded_as_d_shrinks(pentagon_runs):
    coarse = pentagon_runs[1e-2].sup_dev
    assert math.isfinite(coarse)
    assert pentagon_runs[1e-3].sup_dev <= 2 * coarse


def test_phi_defect_quadratic(pentagon_runs):
    a, b = pentagon_runs[1e-2].phi_defect, pentagon_runs[1e-3].phi_defect
    # c d^2 calibrated at the coarse scale must not grow at the fine one
    assert b / a <= 0.02 * 10
    assert b / 1e-6 <= 2 * a / 1e-4


def test_predicted_curve_is_rotated_dual(pentagon_runs):
    r = pentagon_runs[1e-3]
    g = dual_radial(PENT.scaled(1e-3), r.theta)
    assert np.allclose(np.hypot(*r.predicted.T), g)
    # predicted points sit a quarter turn ahead of the orbit angle
    ang = np.arctan2(r.predicted[:, 1], r.predicted[:, 0]) - r.theta
    assert np.allclose(np.cos(ang), 0, atol=1e-12)


def test_d_too_large():
    with pytest.raises(DTooLarge):
        C.dual_deviation(PENT, 0.5)


def test_triangle_cloud_has_sixfold_symmetry():
    r = C.dual_deviation(TRI, 1e-2)
    img = C.rasterize_cloud(r.centers, 256)
    assert C.rotational_symmetry_score(img, 6) >= 0.9


def test_symmetry_score_discriminates():
    t = np.linspace(0, 2 * math.pi, 2000, endpoint=False)
    rect = np.c_[3 * np.cos(t), np.sin(t)]
    circ = np.c_[np.cos(t), np.sin(t)]
    assert C.rotational_symmetry_score(C.rasterize_cloud(circ), 6) > 0.95
    assert C.rotational_symmetry_score(C.rasterize_cloud(rect), 6) < 0.5
