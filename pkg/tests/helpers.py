import copy
import json
from pathlib import Path

EXAMPLE = Path(__file__).resolve().parents[1] / "models" / "cbs_two_flows.json"


def example_doc():
    return json.loads(EXAMPLE.read_text())


def mutate(doc, fn):
    d = copy.deepcopy(doc)
    fn(d)
    return d
