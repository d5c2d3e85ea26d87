import json
import random
from fractions import Fraction as F

import pytest

from tsncalc.bounds import (
    analyze_network,
    analyze_queue,
    backlog_bound,
    delay_bound,
    example_cbs_delay_closed_form,
    output_bound,
)
from tsncalc.errors import CycleError, InfeasibleError, UnboundedError
from tsncalc.minplus import affine, burst_delay, leaky_bucket, minimum, rate_latency, scale
from tsncalc.model import parse_model
from tsncalc.scenarios import ats_chain_document, random_cbs_document, single_switch_document

from helpers import example_doc, mutate


def test_bound_examples():
    assert delay_bound(leaky_bucket(1100, 10**6), rate_latency(5 * 10**7, 0)) == F(22, 10**6)
    assert backlog_bound(leaky_bucket(1000, 10**6), rate_latency(5 * 10**7, F(1, 10**4))) == 1100
    a = leaky_bucket(3, 1)
    assert delay_bound(a, affine(0, 10**9) + a) == 0
    assert backlog_bound(a, a) == 0
    out = output_bound(leaky_bucket(5, 2), rate_latency(4, 3))
    assert out.same_for_positive_t(leaky_bucket(11, 2))
    assert output_bound(a, burst_delay(0)) == a


def test_closed_form():
    assert example_cbs_delay_closed_form(12000, 10**8, F("793.6"), 8 * 10**5, 5 * 10**7) == F(144, 10**6)
    assert example_cbs_delay_closed_form(12000, 10**8, 0, 8 * 10**5, 5 * 10**7) == F(12, 10**5)
    with pytest.raises(InfeasibleError):
        example_cbs_delay_closed_form(12000, 10**8, 1, 3 * 10**7, 5 * 10**7)


def test_bound_monotonicity():
    rng = random.Random(9)
    for _ in range(50):
        b, r = rng.randint(0, 100), rng.randint(0, 10)
        R, T = rng.randint(11, 50), F(rng.randint(0, 10), 3)
        a1 = leaky_bucket(b, r)
        a2 = leaky_bucket(b + rng.randint(0, 20), r)
        s1 = rate_latency(R, T)
        s2 = rate_latency(R, T + F(rng.randint(0, 5), 2))
        assert delay_bound(a1, s1) <= delay_bound(a2, s1) <= delay_bound(a2, s2)
        assert backlog_bound(a1, s1) <= backlog_bound(a2, s1) <= backlog_bound(a2, s2)


def test_example_network():
    report = analyze_network(parse_model(example_doc()))
    q = report.queue("sw1.p1", "A")
    assert q.delay_bound == F(144, 10**6)
    assert q.backlog_bound == F(8896, 5)
    f = report.flow("f1")
    assert f.per_hop_delays == (F(144, 10**6),) and f.end_to_end_delay == F(144, 10**6)


def test_technical_delays_add_up():
    doc = example_doc()
    for lk in doc["links"]:
        lk["technical_delay"] = "1e-6"
    f = analyze_network(parse_model(doc)).flow("f1")
    assert f.end_to_end_delay == sum(f.per_hop_delays) + sum(f.technical_delays)
    assert f.end_to_end_delay == F(146, 10**6)


def test_zero_flows_zero_bounds():
    m = parse_model(example_doc())
    qa = analyze_queue(m.port("sw1.p1"), "A", [], m.link_rate("sw1.p1"))
    assert qa.delay_bound == 0 and qa.backlog_bound == 0


def test_always_open_tas_queue_is_the_link():
    port = {
        "mechanism": "TAS",
        "classes": [{"class": "T", "kind": "TT", "max_frame": "800"}],
        "gcl": {"hyperperiod": "1/1000", "windows": {"T": [["0", "1/1000"]]}},
    }
    flows = [{"id": "f", "cmi": F(1, 1000), "mif": 1, "mfs": 100, "periodic": True, "class": "T"}]
    m = parse_model(single_switch_document(port, flows, 10**8))
    qa = analyze_network(m).queue("sw.out", "T")
    assert qa.delay_bound == 0
    b = F("793.6")
    assert delay_bound(leaky_bucket(b, 8 * 10**5), qa.service_curve) == b / 10**8


def test_unbounded_queue_named():
    doc = mutate(example_doc(), lambda d: d["ports"][2]["classes"][0].update(idle_slope="1000000"))
    for f in doc["flows"]:
        f["mif"] = 2
    with pytest.raises(UnboundedError, match="sw1.p1/A"):
        analyze_network(parse_model(doc))


def test_two_cbs_hops_burst_grows():
    m = parse_model(ats_chain_document(2, mechanism="CBS"))
    f = analyze_network(m).flow("f1")
    d1, d2 = f.per_hop_delays
    assert d2 > d1
    # hop 2 sees the burst inflated by r * D1
    r = F(800, 1) / F(1, 1000)
    b1 = F(800) * (1 - r / 10**8)
    q2 = analyze_network(m).queue("sw2.p1", "A")
    assert q2.aggregate_arrival == minimum(affine(0, 10**8), leaky_bucket(b1 + r * d1, r))


def test_ats_hops_equal():
    f = analyze_network(parse_model(ats_chain_document(2))).flow("f1")
    assert f.per_hop_delays[0] == f.per_hop_delays[1]


def test_cycle_rejected():
    doc = {
        "nodes": [
            {"id": "e1", "kind": "end-station"},
            {"id": "e2", "kind": "end-station"},
            {"id": "A", "kind": "switch"},
            {"id": "B", "kind": "switch"},
        ],
        "links": [
            {"from": "e1.p", "to": "A", "rate": 10**8},
            {"from": "e2.p", "to": "B", "rate": 10**8},
            {"from": "A.b", "to": "B", "rate": 10**8},
            {"from": "B.a", "to": "A", "rate": 10**8},
        ],
        "ports": [{"id": "e1.p", "node": "e1"}, {"id": "e2.p", "node": "e2"}] + [
            {"id": p, "node": p[0], "mechanism": "CBS",
             "classes": [{"class": "A", "idle_slope": 10**7, "max_frame": 800}]}
            for p in ("A.b", "B.a")
        ],
        "flows": [
            {"id": "x", "cmi": "1/1000", "mif": 1, "mfs": 100, "class": "A", "path": ["e1.p", "A.b", "B.a"]},
            {"id": "y", "cmi": "1/1000", "mif": 1, "mfs": 100, "class": "A", "path": ["e2.p", "B.a", "A.b"]},
        ],
    }
    with pytest.raises(CycleError) as exc:
        analyze_network(parse_model(doc))
    assert "A.b" in str(exc.value) and "B.a" in str(exc.value)


def test_detailed_arrival_option_tightens():
    doc = example_doc()
    for f in doc["flows"]:
        f["arrival"] = "detailed"
    simple = analyze_network(parse_model(example_doc())).queue("sw1.p1", "A")
    detailed = analyze_network(parse_model(doc)).queue("sw1.p1", "A")
    assert detailed.delay_bound <= simple.delay_bound


def test_report_document_is_deterministic():
    rng = random.Random(4)
    doc = random_cbs_document(rng)
    a = json.dumps(analyze_network(parse_model(doc)).to_document(), sort_keys=True)
    b = json.dumps(analyze_network(parse_model(doc)).to_document(), sort_keys=True)
    assert a == b
    parsed = json.loads(a)
    for q in parsed["queues"]:
        assert set(q["delayBound"]) == {"exact", "decimal"}


def test_report_numbers_rederive_from_library():
    m = parse_model(example_doc())
    doc = analyze_network(m).to_document()
    q = doc["queues"][0]
    from tsncalc.arrival import simple_arrival, aggregate_arrivals
    from tsncalc.service import CbsClassConfig, cbs_service_curve

    alpha = aggregate_arrivals([simple_arrival(f, 10**8) for f in m.flows])
    beta = cbs_service_curve(1, [CbsClassConfig.for_link(5 * 10**7, 10**8, 800, 12000)], 10**8)
    assert F(q["delayBound"]["exact"]) == delay_bound(alpha, beta)
    assert F(q["backlogBound"]["exact"]) == backlog_bound(alpha, beta)
