"""Reproduce the two-flow CBS example: closed form, curve pipeline and simulation."""

import argparse
import json
from fractions import Fraction as F

from tsncalc.bounds import analyze_network, example_cbs_delay_closed_form
from tsncalc.errors import ScopeError
from tsncalc.model import load_model
from tsncalc.sim import check_bounds_against_sim


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="models/cbs_two_flows.json")
    ap.add_argument("--trials", type=int, default=10)
    args = ap.parse_args()

    model = load_model(args.model)
    report = analyze_network(model)
    q = report.queues[0]
    C = model.link_rate(q.port)
    b, r = F("793.6"), 8 * 10**5
    closed = example_cbs_delay_closed_form(12000, C, b, r, 5 * 10**7)
    print(f"closed form      : {float(closed) * 1e6:.3f} us")
    print(f"curve pipeline   : {float(q.delay_bound) * 1e6:.3f} us ({q.delay_bound} s)")
    print(f"backlog bound    : {float(q.backlog_bound):.1f} bit")
    print(f"agree exactly    : {closed == q.delay_bound}")
    try:
        verdict = check_bounds_against_sim(model, trials=args.trials)
    except ScopeError as exc:
        print(f"simulation skipped: {exc}")
        return
    print(json.dumps(verdict.to_document(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
