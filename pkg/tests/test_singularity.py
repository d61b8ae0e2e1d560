import math
import os
import subprocess
import sys

import numpy as np
import pytest

from olb import singularity as S
from olb.errors import TooSparse
from olb.geom import ConvexPolygon

SQ = ConvexPolygon.square()
TRI = ConvexPolygon.regular(3)
PENT = ConvexPolygon.regular(5)


def test_square_map_singular_rays():
    rays = S.singular_rays(SQ, "map_singular")
    assert len(rays) == 4
    top = [r for r in rays if np.allclose(r.origin, (1, 1))]
    assert len(top) == 1 and np.allclose(top[0].direction, (1, 0))


def test_square_all_extensions():
    assert len(S.singular_rays(SQ, "all_extensions")) == 8


def test_segment_rays_cover_the_line():
    for mode in ("map_singular", "all_extensions"):
        rays = S.singular_rays(ConvexPolygon.segment(), mode)
        assert len(rays) == 2
        d = S.distance_to_rays(ConvexPolygon.segment(), [(3, 0), (-3, 0), (0, 0.5), (0.5, 0)], mode)
        assert d[0] == 0 and d[1] == 0 and d[2] > 0.4 and d[3] > 0.4


def test_segment_crosses_ray():
    ray = S.singular_rays(SQ)[0]
    pts = [ray.origin + 2 * np.asarray(ray.direction)]
    n = np.array([-ray.direction[1], ray.direction[0]])
    assert S.segment_crosses_ray(pts[0] + n, pts[0] - n, ray)
    assert not S.segment_crosses_ray(pts[0] + n, pts[0] + 2 * n, ray)


def test_window_checks():
    with pytest.raises(ValueError):
        S.raster(SQ, (-0.5, -5, 5, 5), 64, 3)
    with pytest.raises(ValueError):
        S.raster(SQ, (-5, -5, 5, 5), 8, 3)


def test_depth_zero_is_the_thickened_rays():
    g = S.raster(TRI, (-5, -5, 5, 5), 128, 0)
    X, Y = np.meshgrid(*g.centers())
    pts = np.c_[X.ravel(), Y.ravel()]
    near = S.distance_to_rays(TRI, pts) < 0.5 * math.hypot(*g.cell_size)
    inside = np.array([TRI.contains(p) for p in pts])
    assert np.array_equal(g.marked.ravel(), near & ~inside)
    assert set(np.unique(g.cells)) <= {-1, 0}


def test_triangle_portrait_smoke():
    g = S.raster(TRI, (-6, -6, 6, 6), 512, 12)
    frac = g.marked.mean()
    assert 0.01 < frac < 0.6
    assert len(np.unique(g.cells[g.marked])) > 5


def test_depth_monotone():
    a = S.raster(PENT, (-4, -4, 4, 4), 200, 6)
    b = S.raster(PENT, (-4, -4, 4, 4), 200, 9)
    assert np.all(b.marked[a.marked])
    assert np.array_equal(a.cells[a.marked], b.cells[a.marked])


def test_square_raster_quarter_turn_symmetry():
    g = S.raster(SQ, (-6, -6, 6, 6), 240, 8)
    rot = np.rot90(g.marked)
    mismatch = np.mean(rot != g.marked)
    assert mismatch < 0.01


def test_box_dimension_calibration():
    n = 729
    i = np.arange(1024)
    seg = np.zeros((1024, 1024), bool)
    seg[i, i] = True
    slope, _ = S.box_dimension(seg)
    assert slope == pytest.approx(1.0, abs=0.1)
    slope, _ = S.box_dimension(np.ones((1024, 1024), bool))
    assert slope == pytest.approx(2.0, abs=0.1)
    keep = np.array([True])
    for _ in range(6):
        keep = np.concatenate([keep, np.zeros_like(keep), keep])
    dust = np.outer(keep, keep)
    assert dust.shape == (n, n)
    slope, _ = S.box_dimension(dust, sizes=[3 ** k for k in range(5)])
    assert slope == pytest.approx(2 * math.log(2) / math.log(3), abs=0.1)


def test_box_dimension_point_cloud_and_sparse():
    t = np.linspace(0, 1, 20000)
    slope, _ = S.box_dimension(np.c_[t, 0.3 * t])
    assert slope == pytest.approx(1.0, abs=0.1)
    with pytest.raises(TooSparse):
        S.box_dimension(np.eye(64, dtype=bool))


def test_orbit_closure_compare():
    r = S.orbit_closure_compare(ConvexPolygon.segment(), (0.3, 2), 2000, (-4, -4, 4, 4), 200, 8)
    assert r["overlap"] < 0.1
    z = S.orbit_closure_compare(PENT, (3, 0.1), 0, (-4, -4, 4, 4), 64, 4)
    assert z["overlap"] == 0.0
    r = S.orbit_closure_compare(PENT, (2.1, 0.37), 20000, (-4, -4, 4, 4), 200, 10)
    assert 0.0 <= r["overlap"] <= 1.0


def test_exports(tmp_path):
    g = S.raster(TRI, (-5, -5, 5, 5), (64, 48), 5)
    S.write_pgm(g, tmp_path / "a.pgm")
    S.write_ppm(g, tmp_path / "a.ppm")
    S.write_depth_csv(g, tmp_path / "a.csv")
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n64 48\n255\n") and len(raw) == len(b"P5\n64 48\n255\n") + 64 * 48
    raw = (tmp_path / "a.ppm").read_bytes()
    assert raw.startswith(b"P6\n64 48\n255\n") and len(raw) == len(b"P6\n64 48\n255\n") + 3 * 64 * 48
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "ix,iy,depth" and len(lines) == 1 + int(g.marked.sum())


RASTER_SCRIPT = """
import hashlib, numpy as np
from olb.geom import ConvexPolygon
from olb.singularity import raster
g = raster(ConvexPolygon.regular(5), (-4, -4, 4, 4), 160, 10)
print(hashlib.sha256(g.cells.tobytes()).hexdigest())
"""


def test_raster_independent_of_thread_count():
    digests = set()
    for threads in ("1", "3"):
        env = dict(os.environ, NUMBA_NUM_THREADS=threads)
        out = subprocess.run([sys.executable, "-c", RASTER_SCRIPT], env=env, capture_output=True,
                             text=True, check=True)
        digests.add(out.stdout.strip())
    assert len(digests) == 1
