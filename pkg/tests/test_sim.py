import random
from fractions import Fraction as F

import pytest

from tsncalc.errors import ScopeError
from tsncalc.model import parse_model
from tsncalc.scenarios import (
    ats_chain_document,
    cbs_example_document,
    random_cbs_document,
    random_tas_document,
    single_switch_document,
)
from tsncalc.service import cbs_max_credit
from tsncalc.sim import check_bounds_against_sim, simulate


def _tight():
    port = {
        "mechanism": "TAS",
        "classes": [{"class": "T", "kind": "TT", "max_frame": "800"}],
        "be_max_frame": "0",
        "gcl": {"hyperperiod": "1/1000", "windows": {"T": [["0", "1/1000"]]}},
    }
    flows = [{"id": "f", "cmi": F(1, 1000), "mif": 1, "mfs": 100, "periodic": True, "class": "T"}]
    return parse_model(single_switch_document(port, flows, 10**8))


def test_single_frame_delay_is_transmission_time():
    res = simulate(_tight())
    s = res.queues[("sw.out", "T")]
    assert s.max_delay == F(8, 10**6)
    assert s.max_backlog == 800
    assert s.frames == 4


def test_example_observations():
    res = simulate(parse_model(cbs_example_document()))
    s = res.queues[("sw.out", "A")]
    assert s.max_delay <= F(152, 10**6)
    assert s.max_backlog <= 1792
    assert s.frames > 0


def test_no_flows_no_observations():
    doc = cbs_example_document()
    doc["flows"] = []
    res = simulate(parse_model(doc), horizon=F(1, 1000))
    assert all(s.max_delay == 0 and s.frames == 0 for s in res.queues.values())


def test_multi_switch_out_of_scope():
    with pytest.raises(ScopeError):
        simulate(parse_model(ats_chain_document(2)))


def test_bad_traffic_mode():
    with pytest.raises(ValueError):
        simulate(parse_model(cbs_example_document()), traffic="bursty")


def test_credit_stays_within_closed_form():
    rng = random.Random(5)
    checked = 0
    while checked < 10:
        m = parse_model(random_cbs_document(rng))
        port = next(p for p in m.ports if p.mechanism is not None)
        if port.mechanism != "CBS":
            continue
        C = m.link_rate(port.id)
        cfgs = port.cbs_configs(C)
        res = simulate(m, traffic="randomized", seed=checked)
        for x, cfg in enumerate(cfgs, start=1):
            s = res.queues.get((port.id, cfg.name))
            if s is None or s.max_credit is None:
                continue
            assert 0 <= s.max_credit <= cbs_max_credit(x, cfgs, C)
        checked += 1


def test_randomized_is_deterministic_per_seed():
    m = parse_model(random_tas_document(random.Random(3)))
    a = simulate(m, traffic="randomized", seed=7).to_document()
    b = simulate(m, traffic="randomized", seed=7).to_document()
    assert a == b


def test_greedy_never_exceeds_bounds():
    rng = random.Random(12)
    for _ in range(5):
        m = parse_model(random_cbs_document(rng))
        assert check_bounds_against_sim(m, trials=2, seed=1).passed
        m = parse_model(random_tas_document(rng))
        assert check_bounds_against_sim(m, trials=2, seed=1).passed


def test_tampered_bound_is_caught():
    m = _tight()
    tx = F(800, 10**8)
    v = check_bounds_against_sim(m, trials=1, tamper=lambda b: {k: (d - tx, q) for k, (d, q) in b.items()})
    assert not v.passed
    assert check_bounds_against_sim(m, trials=1).passed
