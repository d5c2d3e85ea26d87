from fractions import Fraction as F

import pytest

from tsncalc.arrival import (
    FlowSpec,
    aggregate_arrivals,
    detailed_aperiodic_improved,
    detailed_aperiodic_legacy,
    detailed_periodic_arrival,
    simple_arrival,
    simple_parameters,
)
from tsncalc.errors import InfeasibleError, ParameterError
from tsncalc.minplus import affine, leaky_bucket, minimum

C = 10**8
ms = F(1, 1000)
us = F(1, 10**6)


def flow(periodic=True, **kw):
    args = dict(id="f", cmi=ms, mif=1, mfs=100, periodic=periodic)
    args.update(kw)
    return FlowSpec(**args)


def test_simple_parameters():
    assert simple_parameters(flow(), C) == (F("793.6"), 8 * 10**5)
    assert simple_parameters(flow(False), C) == (F("1587.2"), 8 * 10**5)


def test_simple_saturated_is_link_rate():
    f = flow(cmi=F(8, 10**6))
    assert simple_parameters(f, C)[0] == 0
    assert simple_arrival(f, C).same_for_positive_t(affine(0, C))


def test_overutilization_rejected():
    with pytest.raises(InfeasibleError):
        simple_arrival(flow(cmi=F(1, 10**6)), C)


@pytest.mark.parametrize("kw", [dict(cmi=0), dict(mif=0), dict(mfs=0), dict(arrival="x")])
def test_flowspec_validation(kw):
    with pytest.raises(ParameterError):
        flow(**kw)


def test_detailed_periodic():
    a = detailed_periodic_arrival(flow(), C)
    assert a(0) == 0
    assert a(8 * us) == 800
    assert a(ms) == 800
    assert a(ms + 4 * us) == 1200
    assert a(ms + a.period * 0) == 800


def test_legacy_aperiodic():
    a = detailed_aperiodic_legacy(flow(False), C)
    assert a(0) == 0
    assert a(8 * us) == 800
    assert a(16 * us) == 1600
    assert a(ms) == 1600
    assert a(ms + 8 * us) == 2400


def test_improved_aperiodic():
    a = detailed_aperiodic_improved(flow(False), C)
    assert a(0) == 0
    assert a(16 * us) == 1600
    # plateau at 2m until cmi + m/C, then ramps again
    assert a(ms + 8 * us) == 1600
    assert a(ms + 12 * us) == 2000
    assert a.period == ms and a.increment == 800


def test_improved_saturated():
    f = flow(False, cmi=F(8, 10**6))
    assert detailed_aperiodic_improved(f, C) == affine(0, C)


def test_improved_below_legacy_and_simple():
    f = flow(False)
    imp = detailed_aperiodic_improved(f, C)
    leg = detailed_aperiodic_legacy(f, C)
    simple = simple_arrival(f, C)
    assert minimum(imp, leg) == imp
    assert minimum(imp, simple) == imp
    assert imp(ms + 12 * us) < leg(ms + 12 * us)


def test_detailed_below_simple():
    f = flow()
    d = detailed_periodic_arrival(f, C)
    assert minimum(d, simple_arrival(f, C)) == d


def test_aggregate():
    a = simple_arrival(flow(), C)
    two = aggregate_arrivals([a, a])
    b, r = F("793.6"), 8 * 10**5
    assert two == minimum(affine(0, 2 * C), leaky_bucket(2 * b, 2 * r))
    assert aggregate_arrivals([a]) == a
    lbs = [leaky_bucket(3, 1), leaky_bucket(5, 2), leaky_bucket(1, 4)]
    assert aggregate_arrivals(lbs).same_for_positive_t(leaky_bucket(9, 7))
    x, y, z = lbs[0], detailed_periodic_arrival(flow(), C), a
    assert aggregate_arrivals([x, y, z]) == aggregate_arrivals([z, x, y])
    with pytest.raises(ParameterError):
        aggregate_arrivals([])
