import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import valid_points
from olb.billiard import (
    image,
    orbit,
    orbit_points,
    outer_area_step,
    segment_step,
    step,
    step_inverse,
    step_many,
    variational_residual,
)
from olb.errors import BilliardError, Collinear, PointInside, Singular
from olb.geom import ConvexPolygon, EllipseFoci

SEG = ConvexPolygon.segment()
SQ = ConvexPolygon.square()
FOCAL = 2 * math.sqrt(5)


def focal_sum(p):
    return math.dist(p, (-1, 0)) + math.dist(p, (1, 0))


def ellipse_line_oracle(x, p):
    """Second intersection of the line x -> p with x^2/5 + y^2/4 = 1."""
    dx, dy = p[0] - x[0], p[1] - x[1]
    a = dx * dx / 5 + dy * dy / 4
    b = 2 * (x[0] * dx / 5 + x[1] * dy / 4)
    s = -b / a
    return (x[0] + s * dx, x[1] + s * dy)


def test_segment_step_matches_ellipse_line_oracle():
    rec = step(SEG, (0, 2))
    want = ellipse_line_oracle((0, 2), tuple(rec.p))
    assert np.allclose(rec.y, want, atol=1e-12)
    # clockwise convention: the tangency vertex is (-1, 0)
    assert np.allclose(rec.y, (-5 / 3, -4 / 3), atol=1e-12)
    assert focal_sum(rec.y) == pytest.approx(FOCAL, rel=1e-14)


def test_closed_form_segment_step():
    assert np.allclose(segment_step((-1, 0), (1, 0), (0, 2)), (-5 / 3, -4 / 3), atol=1e-12)
    assert np.allclose(segment_step((-1, 0), (1, 0), (0, -2)), (5 / 3, 4 / 3), atol=1e-12)
    with pytest.raises(Collinear):
        segment_step((-1, 0), (1, 0), (3, 0))


@given(st.floats(-20, 20), st.floats(0.05, 20), st.booleans())
def test_closed_form_agrees_with_general_map(x, y, flip):
    p = (x, -y if flip else y)
    assert np.allclose(segment_step((-1, 0), (1, 0), p), step(SEG, p).y, atol=1e-9 * max(1, abs(x), y))


def test_segment_singular_and_inverse():
    with pytest.raises(Singular):
        step(SEG, (2, 0))
    assert np.allclose(step_inverse(SEG, (-5 / 3, -4 / 3)).x, (0, 2), atol=1e-12)


def test_inverse_on_square_side_extension_is_singular():
    # counter-clockwise extension of the top side runs left past (-1, 1)
    with pytest.raises(Singular):
        step_inverse(SQ, (-3, 1))


def test_round_trip_random_pentagon(rng):
    P = ConvexPolygon.random(5, 11)
    worst = 0.0
    for x in valid_points(P, 1000, rng):
        y = step(P, x).y
        worst = max(worst, math.dist(step_inverse(P, y).x, x))
    assert worst <= 1e-8 * P.diameter


def test_two_gon_orbit_conserves_focal_sum():
    o = orbit(SEG, (0, 2), 100)
    assert len(o) == 100 or o.terminal.reason != "MaxSteps"
    drift = max(abs(focal_sum(s.point) - FOCAL) for s in o)
    assert drift < 1e-9 * FOCAL


def test_orbit_terminals():
    o = orbit(SQ, (0.2, 0.1), 10)
    assert len(o) == 0 and o.terminal.reason == "PointInside"
    o = orbit(SQ, (3, 1), 10)
    assert len(o) == 0 and o.terminal.reason == "Singular"
    o = orbit(SQ, (100, 0), 50, stop_radius=10)
    assert o.terminal.reason == "StopRadius"


def test_fast_orbit_matches_records():
    P = ConvexPolygon.regular(5)
    o = orbit(P, (30, 7), 500)
    pts, status = orbit_points(P, (30, 7), 500)
    assert status == "ok"
    assert np.array_equal(pts[:500], np.array([s.point for s in o]))


def test_step_many_matches_step(rng):
    P = ConvexPolygon.random(6, 2)
    xs = valid_points(P, 200, rng)
    status, ys, labels, _ = step_many(P, xs)
    assert np.all(status == 0)
    for x, y, lab in zip(xs, ys, labels):
        rec = step(P, x)
        assert tuple(y) == tuple(rec.y)
        assert tuple(lab) == rec.piece_label


def test_image_iterates_and_inverts():
    P = ConvexPolygon.regular(5)
    x = (11.0, -3.0)
    y = image(P, x, 7)
    assert math.dist(image(P, y, -7), x) < 1e-9
    with pytest.raises(PointInside):
        image(P, (0, 0), 1)


def test_area_step_reflects_through_support_vertex():
    y = outer_area_step(SQ, (2, 2))
    mid = ((2 + y.x) / 2, (2 + y.y) / 2)
    assert mid in {(-1.0, 1.0), (1.0, -1.0)}
    assert math.dist(outer_area_step(SQ, y, reverse=True), (2, 2)) == 0.0


def test_variational_criticality_square(rng):
    d = SQ.diameter
    for x in valid_points(SQ, 20, rng):
        assert variational_residual(SQ, x, 1e-5) < 1e-6 * d


def test_variational_two_gon_and_perturbed():
    assert variational_residual(SEG, (0, 2), 1e-5) < 1e-6
    assert variational_residual(SEG, (0, 2), 1e-5, phi0=1e-2) > 1e-4
    assert variational_residual(SQ, (7, 3.5), 1e-5, phi0=1e-2) > 1e-4


def test_uniform_lemma(rng):
    for P in (SQ, ConvexPolygon.regular(3), ConvexPolygon.random(7, 5)):
        d = P.diameter
        for x in valid_points(P, 300, rng):
            rec = step(P, x)
            assert abs(math.dist(rec.x, rec.p) - math.dist(rec.p, rec.y)) <= 1.5 * d


def test_square_at_twenty_diameters():
    d = SQ.diameter
    rec = step(SQ, (20 * d * math.cos(0.3), 20 * d * math.sin(0.3)))
    assert abs(math.dist(rec.x, rec.p) - math.dist(rec.p, rec.y)) <= 1.5 * d


def test_record_fields_are_consistent():
    rec = step(SQ, (9, 2))
    c, r = rec.circle.center, rec.circle.radius
    for line in (rec.l1, rec.l2, rec.l3):
        assert abs(abs(line.signed_distance(c)) - r) < 1e-9
    assert abs(math.dist(c, rec.p) - r) < 1e-9
    assert rec.steady == (rec.l == rec.piece_label[2])
    if rec.steady:
        assert rec.virtual_table == (SQ.vertex(rec.l), rec.p)


def test_two_gon_points_are_steady():
    o = orbit(SEG, (0.5, 3), 30)
    assert all(s.record.steady for s in o)
    E = EllipseFoci.through((-1, 0), (1, 0), (0.5, 3))
    assert all(abs(E.level([s.point])[0] - E.focal_sum) < 1e-9 for s in o)


def test_map_is_clockwise_far_away():
    for P in (SQ, ConvexPolygon.regular(5)):
        x = (100.0, 0.0)
        y2 = image(P, x, 2)
        assert math.atan2(y2.y, y2.x) < 0


def test_errors_share_a_base():
    assert issubclass(Singular, BilliardError) and issubclass(PointInside, BilliardError)
