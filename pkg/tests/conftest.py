import math

import numpy as np
import pytest

from cmc_bifurcate import Convexity, CylinderConfig, Scenario


@pytest.fixture
def planar_wide():
    """Unstable-capable strip: gamma = 3pi/4."""
    return CylinderConfig(Scenario.PLANAR_STRIP, r=1.0, gamma=3 * math.pi / 4)


@pytest.fixture
def planar_narrow():
    """Always-stable strip with a short arc (small discretization error)."""
    return CylinderConfig(Scenario.PLANAR_STRIP, r=1.0, gamma=0.5)


@pytest.fixture
def wedge_linear():
    """Convex wedge on the degenerate case beta = tan(gamma)."""
    return CylinderConfig(Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 4,
                          beta=math.tan(math.pi / 4), convexity=Convexity.CONVEX)


@pytest.fixture
def wedge_exp():
    """Convex wedge with beta > tan(gamma): exponential-branch kernel."""
    return CylinderConfig(Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 4,
                          beta=2.0, convexity=Convexity.CONVEX)


@pytest.fixture
def wedge_concave():
    return CylinderConfig(Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 6,
                          beta=0.3, convexity=Convexity.CONCAVE)


def smooth_field(grid, seed, amplitude=1.0):
    """Random low-frequency field vanishing on every boundary edge."""
    rng = np.random.default_rng(seed)
    tt, ss = np.meshgrid(grid.t, grid.s, indexing="ij")
    span_t = grid.t_extent
    span_s = grid.s_hi - grid.s_lo
    out = np.zeros_like(tt)
    for kt in (1, 2):
        for ks in (1, 2):
            out += rng.normal() * np.sin(kt * np.pi * tt / span_t) \
                * np.sin(ks * np.pi * (ss - grid.s_lo) / span_s)
    peak = np.max(np.abs(out))
    return amplitude * out / peak


# frozen transcendental roots (independent high-precision root solves)
EXP_ROOT_PI4_B2 = 0.9575040240772687       # tanh(2c) = c
TAN_ROOT_G2_B22 = 0.9231930722561111       # c tan(2.0) = tan(2.2 c), c beta > pi/2
TAN_ROOT_G045PI_B15 = 0.935373212590938    # c tan(0.45 pi) = tan(1.5 c), c beta < pi/2
