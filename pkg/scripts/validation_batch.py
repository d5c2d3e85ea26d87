"""Check analytical bounds against simulation on random single-switch models."""

import argparse
import random
import time

from tsncalc.bounds import analyze_network
from tsncalc.errors import TsnCalcError
from tsncalc.model import parse_model
from tsncalc.scenarios import random_cbs_document, random_tas_document
from tsncalc.sim import check_bounds_against_sim


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cbs", type=int, default=50)
    ap.add_argument("--tas", type=int, default=20)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=808)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    failures, worst = 0, 0.0
    for kind, count, gen in (("cbs", args.cbs, random_cbs_document), ("tas", args.tas, random_tas_document)):
        done = 0
        while done < count:
            m = parse_model(gen(rng))
            try:
                analyze_network(m)
            except TsnCalcError:
                continue
            v = check_bounds_against_sim(m, trials=args.trials, seed=100 * done)
            for row in v.rows:
                if row["delayRatio"]:
                    worst = max(worst, float(row["delayRatio"]))
            if not v.passed:
                failures += 1
                print(f"{kind}{done}: FAIL")
            done += 1
    dt = time.perf_counter() - t0
    print(f"{args.cbs + args.tas} models, {failures} failures, max delay ratio {worst:.3f}, {dt:.1f}s")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
