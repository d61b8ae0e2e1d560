import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from olb.billiard import step
from olb.errors import BilliardError
from olb.geom import ConvexPolygon

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "olb", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("olb")


def valid_points(P: ConvexPolygon, count: int, rng, r_lo: float = 2.0, r_hi: float = 20.0):
    """Points at radius r_lo*d .. r_hi*d where the map and its successor are defined."""
    d = P.diameter
    out = []
    while len(out) < count:
        t = rng.uniform(0, 2 * math.pi)
        r = rng.uniform(r_lo, r_hi) * d
        x = (r * math.cos(t), r * math.sin(t))
        try:
            rec = step(P, x)
            step(P, rec.y)
        except BilliardError:
            continue
        out.append(x)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def square():
    return ConvexPolygon.square()


@pytest.fixture(scope="session")
def segment():
    return ConvexPolygon.segment()
