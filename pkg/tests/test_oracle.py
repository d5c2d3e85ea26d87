import random
from fractions import Fraction as F

import numpy as np
import pytest

from tsncalc.errors import ParameterError
from tsncalc.minplus import affine, convolve, leaky_bucket, minimum, rate_latency
from tsncalc.oracle import GridCurve, grid_op, random_grid_curve

us = F(1, 10**6)


def grid(curve, n=400):
    return GridCurve.from_curve(curve, us, n * us)


def test_conv_rate_latency_pair():
    a = rate_latency(5 * 10**6, 10 * us)
    b = rate_latency(10**7, 20 * us)
    got = grid_op("conv", grid(a), grid(b))
    want = convolve(a, b)
    assert [int(want(k * us)) for k in range(401)] == list(got)


def test_conv_identity():
    a = grid(rate_latency(3 * 10**6, 7 * us))
    delta = GridCurve(us, 400 * us, np.array([0] + [10**12] * 400, dtype=np.int64))
    assert list(grid_op("conv", a, delta)) == list(a.values)


def test_hdev_example_curves():
    C, I = 10**8, 5 * 10**7
    # 2*793.6 bits of burst are not integral on a 1 us grid, so compare a rescaled instance
    alpha5 = minimum(affine(0, 10 * 2 * C), leaky_bucket(10 * 2 * F("793.6"), 10 * 2 * 8 * 10**5))
    beta5 = rate_latency(10 * I, F(12, 10**5))
    h = grid_op("hdev", grid(alpha5, 600), grid(beta5, 600))
    assert h == F(144, 10**6)


def test_vdev_leaky_bucket():
    # the jump after 0 is not grid-continuous, so only the vertical scan is meaningful here
    a, b = grid(leaky_bucket(1000, 10**6)), grid(rate_latency(5 * 10**7, 100 * us))
    assert grid_op("vdev", a, b) == 1100


def test_grid_errors():
    a = grid(affine(0, 10**6), 10)
    b = GridCurve.from_curve(affine(0, 10**6), us, 20 * us)
    with pytest.raises(ParameterError):
        grid_op("conv", a, b)
    with pytest.raises(ParameterError):
        grid_op("nope", a, a)
    with pytest.raises(ParameterError):
        GridCurve.from_curve(affine(0, 1), us, 10 * us)  # values not integral
    with pytest.raises(ParameterError):
        GridCurve(us, F(5, 2) * us, np.zeros(3, dtype=np.int64))


def test_random_grid_curves_are_integral_and_monotone():
    rng = random.Random(3)
    for _ in range(50):
        c, spec = random_grid_curve(rng, us)
        assert c.is_nondecreasing()
        assert c.period == spec.period * us
        g = GridCurve.from_curve(c, us, 60 * us)
        assert np.all(np.diff(g.values) >= 0)
