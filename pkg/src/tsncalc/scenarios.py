"""Ready-made and random model documents used by tests, scripts and the CLI."""

from __future__ import annotations

import random
from fractions import Fraction

from .exact import render_exact

__all__ = [
    "cbs_example_document",
    "single_switch_document",
    "random_cbs_document",
    "random_tas_document",
    "ats_chain_document",
]


def _q(x):
    return render_exact(Fraction(x))


def single_switch_document(port, flows, C, in_rate=None):
    """One switch with output port ``sw.out``; each flow gets its own end station.

    ``flows`` holds dicts with ``id``, ``cmi``, ``mif``, ``mfs``, ``periodic``
    and ``class``.
    """
    in_rate = C if in_rate is None else in_rate
    nodes = [{"id": "sw", "kind": "switch"}, {"id": "sink", "kind": "end-station"}]
    links = [{"from": "sw.out", "to": "sink", "rate": _q(C)}]
    ports = [dict(port, id="sw.out", node="sw")]
    out_flows = []
    for f in flows:
        es = f"es_{f['id']}"
        nodes.append({"id": es, "kind": "end-station"})
        ports.append({"id": f"{es}.p0", "node": es})
        links.append({"from": f"{es}.p0", "to": "sw", "rate": _q(in_rate)})
        fd = dict(f)
        fd["cmi"] = _q(fd["cmi"])
        fd["path"] = [f"{es}.p0", "sw.out"]
        out_flows.append(fd)
    return {"nodes": nodes, "links": links, "ports": ports, "flows": out_flows}


def cbs_example_document():
    """Two 100-byte flows per millisecond into a CBS class with idle slope C/2 (C = 100 Mbit/s).

    The lower-priority frame is 12000 bits, so the class waits at most 120 us.
    """
    C = 10**8
    port = {
        "mechanism": "CBS",
        "classes": [{"class": "A", "idle_slope": _q(C // 2), "max_frame": "800"}],
        "be_max_frame": "12000",
    }
    flows = [
        {"id": f"f{k}", "cmi": Fraction(1, 1000), "mif": 1, "mfs": 100, "periodic": True, "class": "A"}
        for k in (1, 2)
    ]
    return single_switch_document(port, flows, C)


_CMIS = [Fraction(1, 8000), Fraction(1, 4000), Fraction(1, 2000), Fraction(1, 1000)]


def _random_flows(rng, cls, count, C, budget, cmis=_CMIS, prefix=""):
    flows = []
    used = Fraction(0)
    for k in range(count):
        cmi = rng.choice(cmis)
        mfs = rng.randint(64, 1500)
        mif = rng.randint(1, 3)
        m = mif * mfs * 8
        while mif > 1 and m > C * cmi:
            mif -= 1
            m = mif * mfs * 8
        if m > C * cmi or used + Fraction(m) / cmi > budget:
            continue
        used += Fraction(m) / cmi
        flows.append(
            {
                "id": f"{prefix}{cls}{k}",
                "cmi": cmi,
                "mif": mif,
                "mfs": mfs,
                "periodic": rng.random() < 0.6,
                "class": cls,
            }
        )
    return flows, used


def random_cbs_document(rng: random.Random):
    """Random single-switch CBS, ATS-CBS or CBS-CDT port with feasible slopes."""
    C = rng.choice([10**8, 10**9])
    mech = rng.choice(["CBS", "CBS", "ATS_CBS", "CBS_CDT"])
    ncls = rng.randint(1, 3)
    classes = []
    flows = []
    if mech == "CBS_CDT":
        cdt_flows, _ = _random_flows(rng, "CDT", rng.randint(1, 2), C, Fraction(C, 20))
        if not cdt_flows:
            cdt_flows = [{"id": "CDT0", "cmi": Fraction(1, 1000), "mif": 1, "mfs": 128,
                          "periodic": True, "class": "CDT"}]
        classes.append({"class": "CDT", "kind": "CDT", "max_frame": _q(max(f["mfs"] for f in cdt_flows) * 8)})
        flows += cdt_flows
    share = Fraction(3, 4) / ncls
    for k in range(ncls):
        name = "ABCD"[k]
        fl, rate = _random_flows(rng, name, rng.randint(1, 3), C, C * share / 3)
        if not fl:
            continue
        idle = min(rate * Fraction(rng.randint(13, 30), 10), C * share)
        idle = Fraction(int(idle) + 1)
        cd = {"class": name, "idle_slope": _q(idle), "max_frame": _q(max(f["mfs"] for f in fl) * 8)}
        classes.append(cd)
        flows += fl
    if not any(c.get("kind", "CBS") == "CBS" for c in classes):
        return random_cbs_document(rng)
    port = {
        "mechanism": mech,
        "classes": classes,
        "be_max_frame": _q(rng.choice([0, 1500 * 8, 500 * 8])),
    }
    return single_switch_document(port, flows, C)


def _partition(rng, T, pieces):
    """Split ``[0, T)`` into ``pieces`` consecutive windows on a 1/20 grid."""
    cuts = sorted(rng.sample(range(1, 20), pieces - 1))
    edges = [0] + cuts + [20]
    return [(T * Fraction(a, 20), T * Fraction(b, 20)) for a, b in zip(edges, edges[1:])]


def random_tas_document(rng: random.Random, mechanism=None):
    """Random TAS (exclusive windows) or TAS-CBS port at 1 Gbit/s."""
    C = 10**9
    T = rng.choice([Fraction(1, 2000), Fraction(1, 1000)])
    mech = mechanism or rng.choice(["TAS", "TAS_CBS"])
    policy = "nonpreemptive-blocking"
    if mech == "TAS":
        ncls = rng.randint(1, 3)
        wins = _partition(rng, T, rng.randint(ncls, ncls + 3))
        owners = {}
        names = ["T1", "T2", "T3"][:ncls]
        for k, w in enumerate(wins):
            owner = names[k] if k < ncls else rng.choice(names + [None])
            if owner is not None:
                owners.setdefault(owner, []).append(w)
        classes, flows = [], []
        for name in names:
            ws = sorted(owners.get(name, []))
            frac = sum((b - a for a, b in ws), Fraction(0)) / T
            fl, _ = _random_flows(rng, name, rng.randint(1, 3), C, C * frac / 4, cmis=[T, 2 * T])
            if not fl:
                continue
            classes.append({"class": name, "kind": "TT", "max_frame": _q(max(f["mfs"] for f in fl) * 8)})
            flows += fl
        if not flows:
            return random_tas_document(rng, mechanism)
        windows = {
            c["class"]: [[_q(a), _q(b)] for a, b in sorted(owners[c["class"]])] for c in classes
        }
        port = {
            "mechanism": "TAS",
            "classes": classes,
            "be_max_frame": _q(rng.choice([0, 1500 * 8])),
            "gcl": {"hyperperiod": _q(T), "windows": windows},
            "policy": policy,
        }
        return single_switch_document(port, flows, C)
    # TAS-CBS: one time-triggered class without traffic closes the CBS gates
    wins = _partition(rng, T, rng.randint(2, 4))
    tt = [w for k, w in enumerate(wins) if k % 2 == 0 and rng.random() < 0.8] or [wins[0]]
    open_frac = 1 - sum((b - a for a, b in tt), Fraction(0)) / T
    ncls = rng.randint(1, 2)
    classes = [{"class": "TT", "kind": "TT", "max_frame": _q(1500 * 8)}]
    flows = []
    for k in range(ncls):
        name = "AB"[k]
        share = Fraction(1, 2) / ncls
        fl, rate = _random_flows(rng, name, rng.randint(1, 3), C, C * share * open_frac / 3,
                                 cmis=[T, 2 * T])
        if not fl:
            continue
        idle = Fraction(int(min(rate * 3 / open_frac, C * share)) + 1)
        classes.append({"class": name, "idle_slope": _q(idle), "max_frame": _q(max(f["mfs"] for f in fl) * 8)})
        flows += fl
    if not flows:
        return random_tas_document(rng, mechanism)
    port = {
        "mechanism": "TAS_CBS",
        "classes": classes,
        "be_max_frame": _q(rng.choice([0, 1500 * 8])),
        "gcl": {"hyperperiod": _q(T), "windows": {"TT": [[_q(a), _q(b)] for a, b in tt]}},
        "policy": policy,
    }
    return single_switch_document(port, flows, C)


def ats_chain_document(hops=3, mechanism="ATS_CBS"):
    """One flow across ``hops`` identical switches."""
    C = 10**8
    nodes = [{"id": "src", "kind": "end-station"}, {"id": "dst", "kind": "end-station"}]
    ports = [{"id": "src.p0", "node": "src"}]
    links = [{"from": "src.p0", "to": "sw1", "rate": _q(C)}]
    path = ["src.p0"]
    for k in range(1, hops + 1):
        sw = f"sw{k}"
        nodes.append({"id": sw, "kind": "switch"})
        pid = f"{sw}.p1"
        ports.append(
            {
                "id": pid,
                "node": sw,
                "mechanism": mechanism,
                "classes": [{"class": "A", "idle_slope": _q(C // 2), "max_frame": "800"}],
                "be_max_frame": "12000",
            }
        )
        links.append({"from": pid, "to": f"sw{k + 1}" if k < hops else "dst", "rate": _q(C)})
        path.append(pid)
    flows = [{"id": "f1", "cmi": "1/1000", "mif": 1, "mfs": 100, "periodic": True, "class": "A", "path": path}]
    return {"nodes": nodes, "links": links, "ports": ports, "flows": flows}
