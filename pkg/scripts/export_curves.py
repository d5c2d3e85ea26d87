"""Write CSV samples of the arrival and service curves used in the figures."""

import argparse
from fractions import Fraction as F
from pathlib import Path

from tsncalc.arrival import (
    FlowSpec,
    detailed_aperiodic_improved,
    detailed_aperiodic_legacy,
    detailed_periodic_arrival,
    simple_arrival,
)
from tsncalc.minplus import to_csv
from tsncalc.service import (
    CbsClassConfig,
    CdtSpec,
    Gcl,
    cbs_cdt_service_curve,
    cbs_service_curve,
    guaranteed_slots,
    tas_cbs_service_curve,
    tas_service_curve,
    tt_open_time_bound,
)

C = 10**8
US = F(1, 10**6)


def arrival_curves(out):
    periodic = FlowSpec("p", F(1, 1000), 2, 500, True)
    aperiodic = FlowSpec("a", F(1, 1000), 2, 500, False)
    curves = {
        "arrival_simple": simple_arrival(periodic, C),
        "arrival_periodic": detailed_periodic_arrival(periodic, C),
        "arrival_aperiodic_legacy": detailed_aperiodic_legacy(aperiodic, C),
        "arrival_aperiodic_improved": detailed_aperiodic_improved(aperiodic, C),
    }
    for name, c in curves.items():
        (out / f"{name}.csv").write_text(to_csv(c, 5 * US, F(3, 1000)))


def cdt_curves(out):
    cfgs = [
        CbsClassConfig(5 * 10**7, 5 * 10**7 - C, 12000, 12000, "A"),
        CbsClassConfig(2 * 10**7, 2 * 10**7 - C, 12000, 12000, "B"),
    ]
    cdt = CdtSpec(F(1000), F(10**6), F(12000))
    for x in (1, 2):
        (out / f"cbs_class{x}.csv").write_text(to_csv(cbs_service_curve(x, cfgs, C), US, F(1, 2000)))
        (out / f"cbs_cdt_class{x}.csv").write_text(to_csv(cbs_cdt_service_curve(x, cfgs, cdt, C), US, F(1, 2000)))


def tas_curves(out):
    T = F(1, 1000)
    gcl = Gcl(
        T,
        {"TT": ((0, 2 * T / 10),), "A": ((2 * T / 10, T),), "BE": ((2 * T / 10, T),)},
        ("TT", "A", "BE"),
        {"TT": "TT", "A": "CBS", "BE": "BE"},
    )
    slots = guaranteed_slots(gcl, "TT")
    (out / "tas_tt.csv").write_text(to_csv(tas_service_curve(slots, C), 5 * US, 3 * T))
    (out / "tas_tt_open_time.csv").write_text(to_csv(tt_open_time_bound(gcl), 5 * US, 3 * T))
    cfgs = [CbsClassConfig(3 * 10**7, 3 * 10**7 - C, 12000, 12000, "A")]
    (out / "tas_cbs_class1.csv").write_text(to_csv(tas_cbs_service_curve(1, cfgs, gcl, C), 5 * US, 3 * T))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    arrival_curves(out)
    cdt_curves(out)
    tas_curves(out)
    for p in sorted(out.glob("*.csv")):
        print(p)


if __name__ == "__main__":
    main()
