import math

import numpy as np
import pytest

from ladderfn import CurvedKC, FlatKC, PoschlTeller, RosenMorseII
from ladderfn.potentials import contour

RMII = RosenMorseII(2.0, 4.0)
KC = CurvedKC(8.0, 1.0, 1.0)
FLAT = FlatKC(8.0, 1.0)
PT = PoschlTeller(4.0)
FACTOR_SYSTEMS = [RMII, KC, PT, CurvedKC(8.0, 1.0, 0.5), CurvedKC(8.0, 1.5, 2.0), RosenMorseII(0.5, 1.0)]
ALL_SYSTEMS = FACTOR_SYSTEMS + [FLAT]


def sys_id(sys):
    return f"{sys.name}{tuple(sys.params().values())}"


def shell_points(sys, E, n, rng=0, margin=0.01):
    """Random shell points with both momentum signs, avoiding the turning points."""
    rng = np.random.default_rng(rng)
    u = rng.uniform(margin, 1.0 - margin, n)
    s = np.arccos(1.0 - 2.0 * u)
    s = np.where(rng.random(n) < 0.5, s, 2.0 * math.pi - s)
    x, p = contour(sys, E, s)
    return np.asarray(x), np.asarray(p)


def interior_energies(sys, n, fraction=0.8, rng=0):
    w = sys.window
    pad = 0.5 * (1.0 - fraction) * w.width
    return np.random.default_rng(rng).uniform(w.e_min + pad, w.e_max - pad, n)


@pytest.fixture(params=ALL_SYSTEMS, ids=sys_id)
def any_system(request):
    return request.param


@pytest.fixture(params=FACTOR_SYSTEMS, ids=sys_id)
def factor_system(request):
    return request.param
