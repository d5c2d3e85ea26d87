import json
from fractions import Fraction as F

import pytest

from tsncalc.errors import InfeasibleError, ModelError
from tsncalc.model import load_model, model_to_document, parse_model
from tsncalc.scenarios import random_cbs_document, random_tas_document

from helpers import EXAMPLE, example_doc, mutate


def test_example_parses():
    m = load_model(EXAMPLE)
    assert [f.id for f in m.flows] == ["f1", "f2"]
    assert m.link_rate("sw1.p1") == 10**8
    assert m.port("sw1.p1").class_entry("A").idle_slope == 5 * 10**7
    assert m.flows[0].cmi == F(1, 1000)


def test_empty_flows_valid():
    m = parse_model(mutate(example_doc(), lambda d: d.update(flows=[])))
    assert m.flows == ()


def test_round_trip():
    import random

    rng = random.Random(1)
    docs = [example_doc()] + [random_cbs_document(rng) for _ in range(10)]
    docs += [random_tas_document(rng) for _ in range(10)]
    for doc in docs:
        m = parse_model(doc)
        canon = model_to_document(m)
        again = parse_model(json.loads(json.dumps(canon)))
        assert again == m
        assert model_to_document(again) == canon


def _set(path, value):
    def fn(d):
        obj = d
        for key in path[:-1]:
            obj = obj[key]
        obj[path[-1]] = value
    return fn


@pytest.mark.parametrize(
    "change,where",
    [
        (_set(["flows", 0, "cmi"], 0.001), "flows[0].cmi"),
        (_set(["links", 0, "rate"], "fast"), "links[0].rate"),
        (_set(["links", 0, "rate"], 0), "links[0].rate"),
        (_set(["flows", 0, "path"], ["es1.p0", "nope"]), "flows[0].path[1]"),
        (_set(["flows", 0, "class"], "B"), "flows[0].class"),
        (_set(["flows", 0, "mif"], 0), "flows[0].mif"),
        (_set(["ports", 2, "mechanism"], "WFQ"), "ports[2].mechanism"),
        (_set(["ports", 2, "classes", 0, "idle_slope"], -1), "ports[2].classes[0].idle_slope"),
        (_set(["links", 0, "to"], "mars"), "links[0].to"),
        (_set(["nodes", 0, "kind"], "router"), "nodes[0].kind"),
        (_set(["flows", 0, "path"], ["sw1.p1"]), "flows[0].path[0]"),
        (_set(["flows", 0, "surprise"], 1), "flows[0]"),
    ],
)
def test_validation_errors_carry_location(change, where):
    with pytest.raises(ModelError) as exc:
        parse_model(mutate(example_doc(), change))
    assert exc.value.location == where


def test_overutilizing_flow_named():
    doc = mutate(example_doc(), _set(["flows", 1, "cmi"], "1e-6"))
    with pytest.raises(ModelError) as exc:
        parse_model(doc)
    assert "'f2'" in str(exc.value)


def test_idle_slopes_above_link_rate_infeasible():
    doc = mutate(example_doc(), _set(["ports", 2, "classes", 0, "idle_slope"], 10**8))
    with pytest.raises(InfeasibleError):
        parse_model(doc)


def test_exact_number_forms():
    doc = example_doc()
    doc["links"][0]["rate"] = "1e8"
    doc["links"][1]["rate"] = "200000000/2"
    doc["flows"][0]["cmi"] = "1/1000"
    m = parse_model(doc)
    assert m.link_rate("es1.p0") == m.link_rate("es2.p0") == 10**8


def test_tas_cbs_must_not_list_cbs_windows():
    import random

    doc = random_tas_document(random.Random(2), "TAS_CBS")
    cbs = next(c["class"] for c in doc["ports"][0]["classes"] if c.get("kind", "CBS") == "CBS")
    doc["ports"][0]["gcl"]["windows"][cbs] = [["0", "1/100000"]]
    with pytest.raises(ModelError):
        parse_model(doc)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ModelError):
        load_model(p)
    with pytest.raises(ModelError):
        load_model(tmp_path / "missing.json")
