"""Discrete-event simulation of single-switch CBS/TAS output ports.

Times are exact fractions. Each output port has per-class FIFO queues served
in strict priority (CDT, then classes in listed order, then best effort) with
non-preemptive transmission at the link rate. CBS classes follow the credit
rules: the credit drops at the send slope while transmitting, rises at the
idle slope while frames wait or while it is negative, is reset to zero when
the queue is empty and the credit positive, and is frozen while the gate is
closed. A frame may start whenever its gate is open; it may run past the
gate closing (no implicit guard band).

Events at the same instant are handled in a fixed order: end of
transmission, credit update, gate transition, credit reset, then arrivals
and transmission selection.

Frames enter a queue when their last bit has been received. Delay is
measured from that instant to the departure of the last bit; backlog counts
received bits that have not yet been transmitted.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .bounds import analyze_network, backlog_bound, delay_bound, number
from .errors import ScopeError
from .exact import Q, render_decimal
from .minplus import shift_left
from .model import NetworkModel
from .service import cbs_max_credit

__all__ = [
    "QueueStats",
    "SimResult",
    "simulate",
    "default_horizon",
    "check_bounds_against_sim",
    "Verdict",
]

ZERO = Fraction(0)


@dataclass
class QueueStats:
    port: str
    traffic_class: str
    max_delay: Fraction = ZERO
    max_backlog: Fraction = ZERO
    max_credit: Fraction = None
    frames: int = 0

    def to_document(self):
        d = {
            "port": self.port,
            "class": self.traffic_class,
            "maxDelay": number(self.max_delay),
            "maxBacklog": number(self.max_backlog),
            "frames": self.frames,
        }
        if self.max_credit is not None:
            d["maxCredit"] = number(self.max_credit)
        return d


@dataclass
class SimResult:
    traffic: str
    seed: int
    horizon: Fraction
    queues: dict = field(default_factory=dict)  # (port, class) -> QueueStats
    events: int = 0

    def to_document(self):
        return {
            "traffic": self.traffic,
            "seed": self.seed,
            "horizon": number(self.horizon),
            "events": self.events,
            "queues": [self.queues[k].to_document() for k in sorted(self.queues)],
        }


# ---------------------------------------------------------------------------
# gates


class _Gate:
    """Open on a union of windows repeating every ``period``; ``None`` windows means always open."""

    def __init__(self, windows, period):
        self.period = period
        self.windows = sorted(windows) if windows is not None else None
        if self.windows is not None:
            pts = sorted({x for w in self.windows for x in w} | {ZERO})
            self.bounds = [p for p in pts if p < period] if period else []

    def is_open(self, t):
        if self.windows is None:
            return True
        x = t % self.period
        return any(a <= x < b for a, b in self.windows)

    def next_change(self, t):
        if self.windows is None or not self.bounds:
            return None
        base = (t // self.period) * self.period
        x = t - base
        i = bisect_right(self.bounds, x)
        if i < len(self.bounds):
            return base + self.bounds[i]
        return base + self.period


def _complement(windows, T):
    out = []
    pos = ZERO
    for a, b in sorted(windows):
        if a > pos:
            out.append((pos, a))
        pos = max(pos, b)
    if pos < T:
        out.append((pos, T))
    return out


# ---------------------------------------------------------------------------
# queues


@dataclass
class _Queue:
    name: str
    kind: str  # CDT, CBS, TT, BE
    gate: _Gate
    idle: Fraction = None
    send: Fraction = None
    credit: Fraction = ZERO
    max_credit: Fraction = ZERO
    frames: deque = field(default_factory=deque)
    saturated: bool = False
    be_frame: Fraction = ZERO

    @property
    def empty(self):
        return not self.saturated and not self.frames


def _check_scope(model: NetworkModel):
    switches = {n.id for n in model.nodes if n.kind == "switch"}
    if len(switches) > 1:
        raise ScopeError("the simulator handles single-switch models only")
    for f in model.flows:
        if len(f.path) != 2:
            raise ScopeError(f"flow {f.id}: simulated paths are end-station port -> switch port")
        src, dst = model.port(f.path[0]), model.port(f.path[1])
        if src.mechanism is not None:
            raise ScopeError(f"flow {f.id}: scheduling at end-station ports is not simulated")
        if model.node(dst.node).kind != "switch":
            raise ScopeError(f"flow {f.id}: second hop must be a switch port")


def _build_queues(port):
    T = port.gcl.hyperperiod if port.gcl is not None else None
    wins = dict(port.gcl.windows) if port.gcl is not None else {}
    tt_union = [w for c in port.classes if c.kind == "TT" for w in wins.get(c.name, ())]
    queues = []
    for c in port.classes:
        if port.mechanism == "TAS":
            gate = _Gate(wins.get(c.name, ()), T)
        elif port.mechanism == "TAS_CBS":
            gate = _Gate(wins.get(c.name, ()), T) if c.kind == "TT" else _Gate(_complement(tt_union, T), T)
        else:
            gate = _Gate(None, None)
        q = _Queue(c.name, c.kind, gate)
        if c.kind == "CBS":
            q.idle = c.idle_slope
        queues.append(q)
    if port.be_max_frame > 0:
        if port.mechanism in ("TAS", "TAS_CBS"):
            # BE shares the gate state of the non-TT queues: open when all TT gates are closed
            gate = _Gate(_complement(tt_union, T), T)
        else:
            gate = _Gate(None, None)
        queues.append(_Queue("BE", "BE", gate, saturated=True, be_frame=port.be_max_frame))
    return queues


def _frame_arrivals(flow, C_in, horizon, traffic, rng):
    """``(reception_start, reception_end, bits)`` for every frame of ``flow``."""
    L = Fraction(flow.mfs * 8)
    burst = flow.mif * L / C_in
    span = flow.cmi - burst
    out = []
    k = 0
    if traffic == "greedy":
        phase = ZERO
    else:
        phase = span * Fraction(rng.randint(0, 1000), 1000)
    while k * flow.cmi < horizon:
        start = k * flow.cmi
        if traffic == "greedy":
            # aperiodic sources put the first burst at the end of its interval,
            # so that it runs straight into the second one
            off = span if (not flow.periodic and k == 0) else ZERO
        elif flow.periodic:
            off = phase
        else:
            off = span * Fraction(rng.randint(0, 1000), 1000)
        t = start + off
        for _ in range(flow.mif):
            out.append((t, t + L / C_in, L))
            t += L / C_in
        k += 1
    return out


def simulate(model: NetworkModel, horizon=None, traffic="greedy", seed=0) -> SimResult:
    """Simulate every switch output port of a single-switch model."""
    if traffic not in ("greedy", "randomized"):
        raise ValueError("traffic must be 'greedy' or 'randomized'")
    _check_scope(model)
    horizon = Q(horizon) if horizon is not None else default_horizon(model)
    rng = random.Random(seed)
    result = SimResult(traffic, seed, horizon)
    for port in sorted(model.ports, key=lambda p: p.id):
        if port.mechanism is None:
            continue
        flows = sorted(model.flows_at(port.id), key=lambda f: f.id)
        _simulate_port(model, port, flows, horizon, traffic, rng, result)
    return result


def _simulate_port(model, port, flows, horizon, traffic, rng, result):
    C = model.link_rate(port.id)
    queues = _build_queues(port)
    by_name = {q.name: q for q in queues}
    arrivals = []
    for f in flows:
        C_in = model.link_rate(f.path[0])
        for s, e, bits in _frame_arrivals(f, C_in, horizon, traffic, rng):
            arrivals.append((e, s, bits, f.traffic_class, f.id))
    arrivals.sort(key=lambda a: (a[0], a[4]))
    for q in queues:
        if q.kind == "CBS":
            q.send = q.idle - C
    rx = {q.name: [] for q in queues}  # (time, bits) when a frame is fully received
    tx_log = {q.name: [] for q in queues}  # (start, end, bits)
    stats = {q.name: QueueStats(port.id, q.name) for q in queues if q.kind != "BE"}
    ai = 0
    t = ZERO
    tx = None  # (queue, frame, end)
    events = 0

    def accruing(q):
        if tx is not None and tx[0] is q:
            return False
        if not q.gate.is_open(t):
            return False
        return (not q.empty) or q.credit < 0

    while True:
        cands = []
        if ai < len(arrivals):
            cands.append(arrivals[ai][0])
        if tx is not None:
            cands.append(tx[2])
        for q in queues:
            nc = q.gate.next_change(t)
            if nc is not None:
                cands.append(nc)
            if q.kind == "CBS" and q.credit < 0 and accruing(q):
                cands.append(t + (-q.credit) / q.idle)
        drained = ai == len(arrivals) and tx is None and all(q.saturated or not q.frames for q in queues)
        if not cands or (drained and t >= horizon):
            break
        t_next = min(cands)
        dt = t_next - t
        for q in queues:
            if q.kind != "CBS" or dt == 0:
                continue
            if tx is not None and tx[0] is q:
                q.credit += q.send * dt
            elif accruing(q):
                was_negative = q.credit < 0
                q.credit += q.idle * dt
                if was_negative and q.empty and q.credit > 0:
                    q.credit = ZERO
            q.max_credit = max(q.max_credit, q.credit)
        t = t_next
        events += 1
        # 1. end of transmission
        if tx is not None and tx[2] == t:
            q, frame, _ = tx
            tx = None
            if q.kind != "BE":
                arr_t, bits = frame
                st = stats[q.name]
                st.max_delay = max(st.max_delay, t - arr_t)
                st.frames += 1
        # 2. credits are already advanced; 3. gates are evaluated lazily at t
        # 4. reset when empty with positive credit
        for q in queues:
            if q.kind == "CBS" and q.empty and q.credit > 0:
                q.credit = ZERO
        # arrivals
        while ai < len(arrivals) and arrivals[ai][0] <= t:
            e, s, bits, cls, fid = arrivals[ai]
            by_name[cls].frames.append((e, bits))
            rx[cls].append((e, bits))
            ai += 1
        # selection
        if tx is None:
            for q in queues:
                if q.empty or not q.gate.is_open(t):
                    continue
                if q.saturated and t >= horizon:
                    continue
                if q.kind == "CBS" and q.credit < 0:
                    continue
                if q.saturated:
                    frame = (t, q.be_frame)
                else:
                    frame = q.frames.popleft()
                bits = frame[1]
                end = t + bits / C
                tx = (q, frame, end)
                tx_log[q.name].append((t, end, bits))
                break
    result.events += events
    for q in queues:
        if q.kind == "BE":
            continue
        st = stats[q.name]
        st.max_backlog = _max_backlog(rx[q.name], tx_log[q.name])
        if q.kind == "CBS":
            st.max_credit = q.max_credit
        result.queues[(port.id, q.name)] = st


def _max_backlog(rx, txs):
    """Largest ``received - transmitted`` bits; received jumps at frame ends, transmission is fluid."""
    if not rx:
        return ZERO
    times = sorted({e for e, _ in rx} | {s for s, _, _ in txs})
    rx_times = [e for e, _ in rx]
    rx_cum = []
    acc = ZERO
    for _, b in rx:
        acc += b
        rx_cum.append(acc)
    tx_starts = [s for s, _, _ in txs]
    tx_cum = []
    acc = ZERO
    for _, _, b in txs:
        tx_cum.append(acc)
        acc += b
    best = ZERO
    for t in times:
        i = bisect_right(rx_times, t)
        a = rx_cum[i - 1] if i else ZERO
        j = bisect_right(tx_starts, t)
        if j:
            s, e, b = txs[j - 1]
            d = tx_cum[j - 1] + min(b, b * (t - s) / (e - s))
        else:
            d = ZERO
        if d > a:
            raise AssertionError("more bits transmitted than received")
        best = max(best, a - d)
    return best


def default_horizon(model: NetworkModel, periods=4) -> Fraction:
    """A few multiples of the common period of all CMIs and gate cycles."""
    vals = [f.cmi for f in model.flows]
    vals += [p.gcl.hyperperiod for p in model.ports if p.gcl is not None]
    if not vals:
        return Fraction(1, 1000)
    den = lcm(*(v.denominator for v in vals))
    num = lcm(*(int(v * den) for v in vals))
    return periods * Fraction(num, den)


# ---------------------------------------------------------------------------
# bounds vs simulation


@dataclass
class Verdict:
    passed: bool
    rows: list
    results: list

    def to_document(self):
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "checks": self.rows,
            "runs": [r.to_document() for r in self.results],
        }


def packetized_bounds(model, report):
    """Bounds for frames entering the queue only once fully received.

    A frame's last bit reaches the queue up to ``tau = max frame / input rate``
    after its first bit, so the received process is bounded by ``alpha(t + tau)``.
    """
    out = {}
    for qa in report.queues:
        flows = [f for f in model.flows if f.id in qa.flows]
        tau = max((Fraction(f.mfs * 8) / model.input_rate(f, f.path.index(qa.port)) for f in flows),
                  default=ZERO)
        alpha = shift_left(qa.aggregate_arrival, tau)
        out[(qa.port, qa.traffic_class)] = (
            delay_bound(alpha, qa.service_curve),
            backlog_bound(alpha, qa.service_curve),
        )
    return out


def check_bounds_against_sim(model, horizon=None, trials=10, seed=0, policy=None, tamper=None) -> Verdict:
    """Run greedy plus ``trials`` randomized simulations and compare with the analysis.

    ``tamper`` may rewrite the ``{(port, class): (delay, backlog)}`` bounds
    before comparison; the harness self-test uses it to weaken a bound.
    """
    report = analyze_network(model, policy)
    bounds = packetized_bounds(model, report)
    if tamper is not None:
        bounds = tamper(dict(bounds))
    vmax = {}
    for p in model.ports:
        if p.mechanism in ("CBS", "ATS_CBS", "TAS_CBS"):
            C = model.link_rate(p.id)
            cfgs = p.cbs_configs(C)
            for x, cfg in enumerate(cfgs, 1):
                vmax[(p.id, cfg.name)] = cbs_max_credit(x, cfgs, C)
    runs = [simulate(model, horizon, "greedy", seed)]
    runs += [simulate(model, horizon, "randomized", seed + 1 + k) for k in range(trials)]
    rows = []
    ok = True
    for key in sorted(bounds):
        d_b, b_b = bounds[key]
        obs_d = max(r.queues[key].max_delay for r in runs if key in r.queues)
        obs_b = max(r.queues[key].max_backlog for r in runs if key in r.queues)
        row = {
            "port": key[0],
            "class": key[1],
            "delayBound": number(d_b),
            "observedDelay": number(obs_d),
            "delayRatio": render_decimal(obs_d / d_b, 6) if d_b else None,
            "backlogBound": number(b_b),
            "observedBacklog": number(obs_b),
            "backlogRatio": render_decimal(obs_b / b_b, 6) if b_b else None,
        }
        good = obs_d <= d_b and obs_b <= b_b
        if key in vmax:
            cmax = max(r.queues[key].max_credit for r in runs if key in r.queues)
            row["creditBound"] = number(vmax[key])
            row["observedCredit"] = number(cmax)
            good = good and cmax <= vmax[key]
        row["ok"] = good
        ok = ok and good
        rows.append(row)
    return Verdict(ok, rows, runs)
