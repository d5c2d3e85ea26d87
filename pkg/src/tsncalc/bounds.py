"""Delay, backlog and output bounds per queue, and hop-by-hop network analysis."""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from fractions import Fraction

from .arrival import (
    aggregate_arrivals,
    capped_leaky_bucket,
    detailed_aperiodic_improved,
    detailed_periodic_arrival,
    simple_arrival,
    simple_parameters,
)
from .errors import CycleError, InfeasibleError, ParameterError, UnboundedError
from .exact import Q, render_decimal, render_exact
from .minplus import Curve, deconvolve, horizontal_deviation, vertical_deviation, zero
from .model import NetworkModel, Port, cdt_spec_of
from .service import (
    POLICIES,
    cbs_cdt_service_curve,
    cbs_service_curve,
    cdt_service_curve,
    guaranteed_slots,
    tas_cbs_service_curve,
    tas_service_curve,
)

__all__ = [
    "delayBound",
    "backlogBound",
    "output_bound",
    "example_cbs_delay_closed_form",
    "QueueAnalysis",
    "FlowReport",
    "NetworkReport",
    "service_curve_for",
    "analyze_queue",
    "analyze_network",
    "number",
]


def delay_bound(alpha: Curve, beta: Curve) -> Fraction:
    return horizontal_deviation(alpha, beta)


def backlog_bound(alpha: Curve, beta: Curve) -> Fraction:
    return vertical_deviation(alpha, beta)


def output_bound(alpha: Curve, beta: Curve) -> Curve:
    return deconvolve(alpha, beta)


def example_cbs_delay_closed_form(lower_frame, C, b, r, idle) -> Fraction:
    """Delay of two ``min(Ct, b + rt)`` flows in the top CBS class, in closed form."""
    lf, C, b, r, idle = (Q(v) for v in (lower_frame, C, b, r, idle))
    if not (2 * r < idle <= C and r < C):
        raise InfeasibleError("closed form needs 2r < idle slope <= C and r < C")
    return lf / C + 2 * C * b / (idle * (C - r)) - b / (C - r)


def number(q) -> dict:
    """Report rendering of an exact value."""
    return {"exact": render_exact(q), "decimal": render_decimal(q)}


@dataclass(frozen=True)
class QueueAnalysis:
    port: str
    traffic_class: str
    mechanism: str
    link_rate: Fraction
    aggregate_arrival: Curve
    service_curve: Curve
    delay_bound: Fraction
    backlog_bound: Fraction
    output_bound: Curve
    flows: tuple = ()

    def to_document(self):
        return {
            "port": self.port,
            "class": self.traffic_class,
            "mechanism": self.mechanism,
            "linkRate": number(self.link_rate),
            "flows": list(self.flows),
            "delayBound": number(self.delay_bound),
            "backlogBound": number(self.backlog_bound),
            "arrivalRate": number(self.aggregate_arrival.rate),
            "serviceRate": number(self.service_curve.rate),
        }


@dataclass(frozen=True)
class FlowReport:
    flow: str
    hops: tuple  # (port, class) per analyzed hop
    per_hop_delays: tuple
    technical_delays: tuple
    end_to_end_delay: Fraction

    def to_document(self):
        return {
            "flow": self.flow,
            "hops": [
                {"port": p, "class": c, "delay": number(d)}
                for (p, c), d in zip(self.hops, self.per_hop_delays)
            ],
            "technicalDelay": number(sum(self.technical_delays, Fraction(0))),
            "endToEndDelay": number(self.end_to_end_delay),
        }


@dataclass
class NetworkReport:
    queues: list = field(default_factory=list)
    flows: list = field(default_factory=list)
    validation: dict = None

    def queue(self, port, cls) -> QueueAnalysis:
        for q in self.queues:
            if q.port == port and q.traffic_class == cls:
                return q
        raise KeyError((port, cls))

    def flow(self, fid) -> FlowReport:
        for f in self.flows:
            if f.flow == fid:
                return f
        raise KeyError(fid)

    def to_document(self):
        doc = {
            "queues": [q.to_document() for q in self.queues],
            "flows": [f.to_document() for f in self.flows],
        }
        if self.validation is not None:
            doc["validation"] = self.validation
        return doc


# ---------------------------------------------------------------------------
# per queue


def service_curve_for(port: Port, cls: str, C, policy=None, cdt=None) -> Curve:
    """Service curve of class ``cls`` at ``port`` according to its mechanism."""
    C = Q(C)
    entry = port.class_entry(cls)
    if entry is None:
        raise ParameterError(f"class {cls!r} is not configured at port {port.id!r}")
    policy = policy or port.policy
    if policy not in POLICIES:
        raise ParameterError(f"unknown slot policy {policy!r}")
    mech = port.mechanism
    if mech is None:
        raise ParameterError(f"port {port.id!r} has no scheduling mechanism")
    if entry.kind == "CDT":
        if cdt is None:
            cdt = cdt_spec_of(port, C)
        return cdt_service_curve(cdt, C)
    if entry.kind == "TT":
        slots = guaranteed_slots(port.gate_schedule(), cls, policy, port.max_other_frame(cls), C)
        return tas_service_curve(slots, C)
    configs = port.cbs_configs(C)
    x = port.cbs_index(cls)
    if mech in ("CBS", "ATS_CBS"):
        return cbs_service_curve(x, configs, C)
    if mech == "CBS_CDT":
        if cdt is None:
            cdt = cdt_spec_of(port, C)
        return cbs_cdt_service_curve(x, configs, cdt, C)
    if mech == "TAS_CBS":
        return tas_cbs_service_curve(x, configs, port.gate_schedule(), C)
    raise ParameterError(f"class kind {entry.kind} not supported under {mech}")


def analyze_queue(port: Port, cls: str, arrivals, C, policy=None, cdt=None, flows=()) -> QueueAnalysis:
    """All three bounds for one output queue fed by ``arrivals``."""
    C = Q(C)
    beta = service_curve_for(port, cls, C, policy, cdt)
    arrivals = list(arrivals)
    alpha = aggregate_arrivals(arrivals) if arrivals else zero()
    ra, rb = alpha.rate, beta.rate
    if ra > 0 and ra >= rb:
        raise UnboundedError(
            f"queue {port.id}/{cls}: arrival rate {render_decimal(ra)} bits/s is not below "
            f"service rate {render_decimal(rb)} bits/s"
        )
    try:
        d = delay_bound(alpha, beta)
        b = backlog_bound(alpha, beta)
        out = output_bound(alpha, beta)
    except UnboundedError as exc:
        raise UnboundedError(f"queue {port.id}/{cls}: {exc}") from None
    return QueueAnalysis(port.id, cls, port.mechanism, C, alpha, beta, d, b, out, tuple(flows))


# ---------------------------------------------------------------------------
# network


def port_order(model: NetworkModel):
    """Ports in dependency order (feed-forward); raises :class:`CycleError` otherwise."""
    ts = graphlib.TopologicalSorter()
    for p in sorted(model._ports):
        ts.add(p)
    for f in sorted(model.flows, key=lambda f: f.id):
        for a, b in zip(f.path, f.path[1:]):
            ts.add(b, a)
    try:
        return list(ts.static_order())
    except graphlib.CycleError as exc:
        raise CycleError(exc.args[1]) from None


@dataclass
class _FlowState:
    burst: Fraction = None
    rate: Fraction = None
    fresh: bool = True  # next analyzed hop sees the source envelope
    hops: list = field(default_factory=list)
    delays: list = field(default_factory=list)


def _source_arrival(flow, C):
    if flow.arrival == "detailed":
        if flow.periodic:
            return detailed_periodic_arrival(flow, C)
        return detailed_aperiodic_improved(flow, C)
    return simple_arrival(flow, C)


def analyze_network(model: NetworkModel, policy=None) -> NetworkReport:
    """Successive per-hop analysis in port dependency order.

    After a hop with class delay ``D`` a flow's burst grows by ``r D``; ATS
    ports reshape, so the next hop sees the source envelope again.
    """
    order = port_order(model)
    state = {f.id: _FlowState() for f in model.flows}
    report = NetworkReport()
    for pid in order:
        port = model.port(pid)
        here = [f for f in model.flows if pid in f.path]
        if port.mechanism is None or not here:
            continue
        C = model.link_rate(pid)
        arrivals = {}
        params = {}
        for f in here:
            hop = f.path.index(pid)
            st = state[f.id]
            Cin = model.input_rate(f, hop)
            if st.fresh:
                b, r = simple_parameters(f, Cin)
                st.burst, st.rate = b, r
                arrivals[f.id] = _source_arrival(f, Cin)
            else:
                arrivals[f.id] = capped_leaky_bucket(Cin, st.burst, st.rate)
            params[f.id] = (st.burst, st.rate)
        classes = [c.name for c in port.classes if any(f.traffic_class == c.name for f in here)]
        cdt = None
        cdt_cls = port.cdt_class()
        if cdt_cls is not None:
            cdt = cdt_spec_of(port, C, [params[f.id] for f in here if f.traffic_class == cdt_cls.name])
        delays = {}
        for cls in classes:
            members = sorted((f for f in here if f.traffic_class == cls), key=lambda f: f.id)
            qa = analyze_queue(
                port, cls, [arrivals[f.id] for f in members], C, policy, cdt, [f.id for f in members]
            )
            report.queues.append(qa)
            delays[cls] = qa.delay_bound
        for f in here:
            st = state[f.id]
            D = delays[f.traffic_class]
            st.hops.append((pid, f.traffic_class))
            st.delays.append(D)
            if port.mechanism == "ATS_CBS":
                st.fresh = True
            else:
                st.fresh = False
                st.burst += st.rate * D
    for f in sorted(model.flows, key=lambda f: f.id):
        st = state[f.id]
        tech = tuple(model.link_of(p).technical_delay for p in f.path)
        total = sum(st.delays, Fraction(0)) + sum(tech, Fraction(0))
        report.flows.append(FlowReport(f.id, tuple(st.hops), tuple(st.delays), tech, total))
    report.queues.sort(key=lambda q: (q.port, q.traffic_class))
    return report
