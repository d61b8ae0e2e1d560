import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from olb.errors import Degenerate
from olb.extouch import (
    KAPPA,
    TriangleSides,
    extouch_of,
    extouch_sides,
    place_parent,
    residual_f,
    solve_parent,
    triangle_from_sides,
)


def tangent_points(R):
    """Excircle contact points from tangent lengths: on side YZ the point lies
    s - z from Y."""
    X, Y, Z = np.asarray(R, float)
    x, y, z = np.hypot(*(Y - Z)), np.hypot(*(Z - X)), np.hypot(*(X - Y))
    s = (x + y + z) / 2
    return np.array([
        Y + (s - z) / x * (Z - Y),
        Z + (s - x) / y * (X - Z),
        X + (s - y) / z * (Y - X),
    ])


def test_equilateral_extouch_is_medial():
    R = triangle_from_sides(2, 2, 2)
    E = extouch_of(R)
    mids = (R[[1, 2, 0]] + R[[2, 0, 1]]) / 2
    assert np.allclose(E, mids, atol=1e-14)
    assert np.allclose(TriangleSides.of(E).as_tuple(), 1.0)


def test_right_triangle_extouch_sides():
    E = extouch_of(triangle_from_sides(3, 4, 5))
    got = TriangleSides.of(E).as_tuple()
    assert np.allclose(got, (math.sqrt(1.8), math.sqrt(6.4), math.sqrt(13)), atol=1e-12)
    assert np.allclose(extouch_sides(TriangleSides(3, 4, 5)).as_tuple(), got, atol=1e-12)


def test_collinear_input():
    with pytest.raises(Degenerate):
        extouch_of([(0, 0), (1, 1), (2, 2)])


@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.05, 0.95))
def test_construction_matches_tangent_lengths(y, z, frac):
    lo, hi = abs(y - z), y + z
    x = lo + frac * (hi - lo)
    if min(x + y - z, y + z - x, z + x - y) < 1e-3 * (x + y + z):
        return
    R = triangle_from_sides(x, y, z)
    assert np.allclose(extouch_of(R), tangent_points(R), atol=1e-9 * (x + y + z))


@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.05, 0.95))
def test_kappa_area_identity(y, z, frac):
    lo, hi = abs(y - z), y + z
    x = lo + frac * (hi - lo)
    if min(x + y - z, y + z - x, z + x - y) < 1e-3 * (x + y + z):
        return
    R = triangle_from_sides(x, y, z)
    a = TriangleSides.of(extouch_of(R)).a
    s = (x + y + z) / 2
    area2 = s * (s - x) * (s - y) * (s - z)
    assert y * z * (x * x - a * a) == pytest.approx(KAPPA * area2, rel=1e-8, abs=1e-12)


def test_solve_parent_examples():
    sol = solve_parent(TriangleSides(1, 1, 1))
    assert (sol.x, sol.y, sol.z) == pytest.approx((2, 2, 2), abs=1e-10)
    sol = solve_parent(TriangleSides(math.sqrt(1.8), math.sqrt(6.4), math.sqrt(13)))
    assert (sol.x, sol.y, sol.z) == pytest.approx((3, 4, 5), abs=1e-10)
    lo, hi = sol.root_bracket
    assert residual_f(lo, TriangleSides(math.sqrt(1.8), math.sqrt(6.4), math.sqrt(13))) < 0 < \
        residual_f(hi, TriangleSides(math.sqrt(1.8), math.sqrt(6.4), math.sqrt(13)))


def test_triangle_inequality_precondition():
    with pytest.raises(ValueError):
        TriangleSides(1, 1, 2.1)


def test_round_trip_random(rng):
    worst = 0.0
    for _ in range(300):
        R = rng.normal(size=(3, 2))
        x, y, z = TriangleSides.of(R).as_tuple()
        if min(x + y - z, y + z - x, z + x - y) < 1e-2 * (x + y + z):
            continue
        sol = solve_parent(TriangleSides.of(extouch_of(R)))
        worst = max(worst, max(abs(u - v) / v for u, v in zip((sol.x, sol.y, sol.z), (x, y, z))))
    assert worst < 1e-8


def test_place_parent_equilateral():
    Q = triangle_from_sides(1, 1, 1)
    Q = Q - Q.mean(0)
    R, defect = place_parent(Q)
    assert np.allclose(TriangleSides.of(R).as_tuple(), 2, atol=1e-10)
    assert np.allclose(R.mean(0), 0, atol=1e-12)
    assert defect <= 1e-8


def test_place_parent_right_triangle_and_reflection():
    Q = extouch_of(triangle_from_sides(3, 4, 5))
    diam = max(TriangleSides.of(Q).as_tuple())
    _, d1 = place_parent(Q)
    _, d2 = place_parent(Q * [1, -1])
    assert d1 <= 1e-7 * diam and d2 <= 1e-7 * diam


def test_placed_parent_is_three_periodic(rng):
    for _ in range(30):
        Q = rng.normal(size=(3, 2))
        s = TriangleSides.of(Q).as_tuple()
        if min(s[0] + s[1] - s[2], s[1] + s[2] - s[0], s[2] + s[0] - s[1]) < 0.05 * sum(s):
            continue
        R, defect = place_parent(Q)
        assert np.allclose(extouch_of(R), Q, atol=1e-9 * max(s)) or \
            np.allclose(np.sort(extouch_of(R), 0), np.sort(Q, 0), atol=1e-9 * max(s))
        assert defect <= 1e-7 * max(s)
