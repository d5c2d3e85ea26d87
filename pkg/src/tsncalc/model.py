"""Network model documents: parsing, validation and canonical serialization.

A model is a JSON object with ``nodes``, ``links``, ``ports`` and ``flows``.
Every rate, time and frame size must be exact: an integer, a decimal string
(``"793.6"``, ``"1e-3"``) or a fraction string (``"1/3"``). JSON floats are
rejected for those fields so that nothing is silently rounded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .arrival import FlowSpec
from .errors import InfeasibleError, ModelError, ParameterError
from .exact import Q, render_exact
from .service import POLICIES, CbsClassConfig, CdtSpec, Gcl

__all__ = [
    "MECHANISMS",
    "Node",
    "Link",
    "ClassEntry",
    "CdtBlock",
    "GclBlock",
    "Port",
    "NetworkModel",
    "parse_model",
    "load_model",
    "model_to_document",
]

MECHANISMS = ("CBS", "CBS_CDT", "TAS", "TAS_CBS", "ATS_CBS")
NODE_KINDS = ("end-station", "switch")
CLASS_KINDS = ("CBS", "CDT", "TT")


@dataclass(frozen=True)
class Node:
    id: str
    kind: str


@dataclass(frozen=True)
class Link:
    from_port: str
    to: str
    rate: Fraction
    technical_delay: Fraction = Fraction(0)


@dataclass(frozen=True)
class ClassEntry:
    """A traffic class at a port; list order is priority order, highest first."""

    name: str
    kind: str
    max_frame: Fraction
    idle_slope: Optional[Fraction] = None
    send_slope: Optional[Fraction] = None
    lower_max_frame: Optional[Fraction] = None


@dataclass(frozen=True)
class CdtBlock:
    burst: Fraction
    rate: Fraction
    lower_max_frame: Optional[Fraction] = None


@dataclass(frozen=True)
class GclBlock:
    hyperperiod: Fraction
    windows: tuple  # ((class, ((open, close), ...)), ...)


@dataclass(frozen=True)
class Port:
    id: str
    node: str
    mechanism: Optional[str] = None
    classes: tuple = ()
    be_max_frame: Fraction = Fraction(0)
    gcl: Optional[GclBlock] = None
    cdt: Optional[CdtBlock] = None
    policy: str = "ideal"

    def class_entry(self, name):
        for c in self.classes:
            if c.name == name:
                return c
        return None

    def lower_max_frame(self, name):
        """Largest frame of any class below ``name``, best effort included."""
        names = [c.name for c in self.classes]
        k = names.index(name)
        frames = [c.max_frame for c in self.classes[k + 1:]] + [self.be_max_frame]
        return max(frames)

    def max_other_frame(self, name):
        """Largest frame of any other class at this port, best effort included."""
        frames = [c.max_frame for c in self.classes if c.name != name] + [self.be_max_frame]
        return max(frames)

    def cbs_configs(self, C):
        """CBS classes in priority order as :class:`CbsClassConfig`."""
        out = []
        for c in self.classes:
            if c.kind != "CBS":
                continue
            lower = c.lower_max_frame if c.lower_max_frame is not None else self.lower_max_frame(c.name)
            send = c.send_slope if c.send_slope is not None else c.idle_slope - C
            out.append(CbsClassConfig(c.idle_slope, send, c.max_frame, lower, c.name))
        return out

    def cbs_index(self, name):
        names = [c.name for c in self.classes if c.kind == "CBS"]
        return names.index(name) + 1

    def cdt_class(self):
        for c in self.classes:
            if c.kind == "CDT":
                return c
        return None

    def gate_schedule(self):
        """The :class:`Gcl` of this port; CBS gates of TAS-CBS ports open whenever TT gates are closed."""
        if self.gcl is None:
            return None
        windows = dict(self.gcl.windows)
        kinds = {c.name: ("TT" if c.kind in ("TT", "CDT") else c.kind) for c in self.classes}
        return Gcl(self.gcl.hyperperiod, windows, tuple(c.name for c in self.classes), kinds)


@dataclass(frozen=True)
class NetworkModel:
    nodes: tuple
    links: tuple
    ports: tuple
    flows: tuple

    def port(self, pid) -> Port:
        return self._ports[pid]

    def node(self, nid) -> Node:
        return self._nodes[nid]

    def link_of(self, pid) -> Link:
        return self._links[pid]

    def __post_init__(self):
        object.__setattr__(self, "_ports", {p.id: p for p in self.ports})
        object.__setattr__(self, "_nodes", {n.id: n for n in self.nodes})
        object.__setattr__(self, "_links", {lk.from_port: lk for lk in self.links})

    def __eq__(self, other):
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return (self.nodes, self.links, self.ports, self.flows) == (
            other.nodes,
            other.links,
            other.ports,
            other.flows,
        )

    __hash__ = None

    def link_rate(self, pid) -> Fraction:
        return self.link_of(pid).rate

    def input_rate(self, flow: FlowSpec, hop: int) -> Fraction:
        """Rate of the link feeding ``flow.path[hop]``; the first port is fed by its own link."""
        if hop == 0:
            return self.link_rate(flow.path[0])
        return self.link_rate(flow.path[hop - 1])

    def flows_at(self, pid, cls=None):
        return [f for f in self.flows if pid in f.path and (cls is None or f.traffic_class == cls)]


# ---------------------------------------------------------------------------
# parsing


def _num(value, loc, *, positive=False, nonneg=True):
    if isinstance(value, bool) or value is None:
        raise ModelError(loc, f"expected an exact number, got {value!r}")
    if isinstance(value, float):
        raise ModelError(loc, "floating point is not accepted; write the number as a string or integer")
    if not isinstance(value, (int, str)):
        raise ModelError(loc, f"expected an exact number, got {type(value).__name__}")
    try:
        q = Q(value)
    except ParameterError as exc:
        raise ModelError(loc, str(exc)) from None
    if positive and q <= 0:
        raise ModelError(loc, f"must be positive, got {value}")
    if nonneg and q < 0:
        raise ModelError(loc, f"must be >= 0, got {value}")
    return q


def _int(value, loc):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ModelError(loc, f"expected a positive integer, got {value!r}")
    return value


def _str(value, loc):
    if not isinstance(value, str) or not value:
        raise ModelError(loc, f"expected a non-empty string, got {value!r}")
    return value


def _obj(value, loc):
    if not isinstance(value, dict):
        raise ModelError(loc, "expected an object")
    return value


def _list(value, loc):
    if not isinstance(value, list):
        raise ModelError(loc, "expected a list")
    return value


def _unknown(d, allowed, loc):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ModelError(loc, f"unknown field(s): {', '.join(extra)}")


def _parse_class(d, loc, mechanism):
    _obj(d, loc)
    _unknown(d, ("class", "kind", "idle_slope", "send_slope", "max_frame", "lower_max_frame"), loc)
    name = _str(d.get("class"), f"{loc}.class")
    default_kind = "TT" if mechanism == "TAS" else "CBS"
    kind = d.get("kind", default_kind)
    if kind not in CLASS_KINDS:
        raise ModelError(f"{loc}.kind", f"must be one of {', '.join(CLASS_KINDS)}")
    if "max_frame" not in d:
        raise ModelError(loc, "missing max_frame (bits)")
    max_frame = _num(d["max_frame"], f"{loc}.max_frame")
    idle = send = None
    if kind == "CBS":
        if "idle_slope" not in d:
            raise ModelError(loc, f"CBS class {name} needs idle_slope")
        idle = _num(d["idle_slope"], f"{loc}.idle_slope", positive=True)
        if "send_slope" in d:
            send = _num(d["send_slope"], f"{loc}.send_slope", nonneg=False)
    lower = _num(d["lower_max_frame"], f"{loc}.lower_max_frame") if "lower_max_frame" in d else None
    return ClassEntry(name, kind, max_frame, idle, send, lower)


def _parse_gcl(d, loc, names):
    _obj(d, loc)
    _unknown(d, ("hyperperiod", "windows"), loc)
    T = _num(d.get("hyperperiod"), f"{loc}.hyperperiod", positive=True)
    wins = _obj(d.get("windows", {}), f"{loc}.windows")
    out = []
    for cls in sorted(wins):
        if cls not in names:
            raise ModelError(f"{loc}.windows.{cls}", "class not configured at this port")
        pairs = []
        for k, w in enumerate(_list(wins[cls], f"{loc}.windows.{cls}")):
            wl = f"{loc}.windows.{cls}[{k}]"
            if not isinstance(w, list) or len(w) != 2:
                raise ModelError(wl, "expected [open, close]")
            a, b = _num(w[0], wl), _num(w[1], wl)
            if not a < b <= T:
                raise ModelError(wl, "needs open < close <= hyperperiod")
            if pairs and a < pairs[-1][1]:
                raise ModelError(wl, "windows must be sorted and disjoint")
            pairs.append((a, b))
        out.append((cls, tuple(pairs)))
    return GclBlock(T, tuple(out))


def _parse_port(d, loc):
    _obj(d, loc)
    _unknown(d, ("id", "node", "mechanism", "classes", "be_max_frame", "gcl", "cdt", "policy"), loc)
    pid = _str(d.get("id"), f"{loc}.id")
    node = _str(d.get("node"), f"{loc}.node")
    mech = d.get("mechanism")
    if mech is not None and mech not in MECHANISMS:
        raise ModelError(f"{loc}.mechanism", f"must be one of {', '.join(MECHANISMS)}")
    classes = tuple(
        _parse_class(c, f"{loc}.classes[{k}]", mech)
        for k, c in enumerate(_list(d.get("classes", []), f"{loc}.classes"))
    )
    names = [c.name for c in classes]
    if len(set(names)) != len(names):
        raise ModelError(f"{loc}.classes", "duplicate class names")
    be = _num(d.get("be_max_frame", 0), f"{loc}.be_max_frame")
    gcl = _parse_gcl(d["gcl"], f"{loc}.gcl", names) if d.get("gcl") is not None else None
    cdt = None
    if d.get("cdt") is not None:
        c = _obj(d["cdt"], f"{loc}.cdt")
        _unknown(c, ("burst", "rate", "lower_max_frame"), f"{loc}.cdt")
        lower = _num(c["lower_max_frame"], f"{loc}.cdt.lower_max_frame") if "lower_max_frame" in c else None
        cdt = CdtBlock(_num(c.get("burst"), f"{loc}.cdt.burst"), _num(c.get("rate"), f"{loc}.cdt.rate"), lower)
    policy = d.get("policy", "ideal")
    if policy not in POLICIES:
        raise ModelError(f"{loc}.policy", f"must be one of {', '.join(POLICIES)}")
    return Port(pid, node, mech, classes, be, gcl, cdt, policy)


def _parse_flow(d, loc):
    _obj(d, loc)
    _unknown(d, ("id", "cmi", "mif", "mfs", "periodic", "class", "path", "arrival"), loc)
    fid = _str(d.get("id"), f"{loc}.id")
    cmi = _num(d.get("cmi"), f"{loc}.cmi", positive=True)
    mif = _int(d.get("mif"), f"{loc}.mif")
    mfs = _int(d.get("mfs"), f"{loc}.mfs")
    periodic = d.get("periodic", True)
    if not isinstance(periodic, bool):
        raise ModelError(f"{loc}.periodic", "expected true or false")
    cls = _str(d.get("class"), f"{loc}.class")
    path = tuple(_str(p, f"{loc}.path[{k}]") for k, p in enumerate(_list(d.get("path"), f"{loc}.path")))
    if not path:
        raise ModelError(f"{loc}.path", "must not be empty")
    arrival = d.get("arrival", "simple")
    if arrival not in ("simple", "detailed"):
        raise ModelError(f"{loc}.arrival", "must be 'simple' or 'detailed'")
    return FlowSpec(fid, cmi, mif, mfs, periodic, cls, path, arrival)


def parse_model(doc) -> NetworkModel:
    """Validate a decoded JSON document and build a :class:`NetworkModel`."""
    _obj(doc, "")
    _unknown(doc, ("nodes", "links", "ports", "flows"), "model")
    nodes = []
    for k, n in enumerate(_list(doc.get("nodes", []), "nodes")):
        loc = f"nodes[{k}]"
        _obj(n, loc)
        _unknown(n, ("id", "kind"), loc)
        kind = n.get("kind")
        if kind not in NODE_KINDS:
            raise ModelError(f"{loc}.kind", f"must be one of {', '.join(NODE_KINDS)}")
        nodes.append(Node(_str(n.get("id"), f"{loc}.id"), kind))
    ports = [_parse_port(p, f"ports[{k}]") for k, p in enumerate(_list(doc.get("ports", []), "ports"))]
    links = []
    for k, lk in enumerate(_list(doc.get("links", []), "links")):
        loc = f"links[{k}]"
        _obj(lk, loc)
        _unknown(lk, ("from", "to", "rate", "technical_delay"), loc)
        links.append(
            Link(
                _str(lk.get("from"), f"{loc}.from"),
                _str(lk.get("to"), f"{loc}.to"),
                _num(lk.get("rate"), f"{loc}.rate", positive=True),
                _num(lk.get("technical_delay", 0), f"{loc}.technical_delay"),
            )
        )
    flows = [_parse_flow(f, f"flows[{k}]") for k, f in enumerate(_list(doc.get("flows", []), "flows"))]
    model = NetworkModel(tuple(nodes), tuple(links), tuple(ports), tuple(flows))
    _validate(model)
    return model


def _dupes(items, loc):
    seen = set()
    for k, x in enumerate(items):
        if x in seen:
            raise ModelError(f"{loc}[{k}].id", f"duplicate id {x!r}")
        seen.add(x)


def _validate(model: NetworkModel):
    _dupes([n.id for n in model.nodes], "nodes")
    _dupes([p.id for p in model.ports], "ports")
    _dupes([f.id for f in model.flows], "flows")
    node_ids = {n.id for n in model.nodes}
    port_ids = {p.id for p in model.ports}
    seen_from = set()
    for k, lk in enumerate(model.links):
        if lk.from_port not in port_ids:
            raise ModelError(f"links[{k}].from", f"unknown port {lk.from_port!r}")
        if lk.to not in node_ids:
            raise ModelError(f"links[{k}].to", f"unknown node {lk.to!r}")
        if lk.from_port in seen_from:
            raise ModelError(f"links[{k}].from", f"port {lk.from_port!r} already has a link")
        if model.port(lk.from_port).node == lk.to:
            raise ModelError(f"links[{k}]", "link loops back to its own node")
        seen_from.add(lk.from_port)
    for k, p in enumerate(model.ports):
        _validate_port(model, p, f"ports[{k}]", node_ids)
    for k, f in enumerate(model.flows):
        _validate_flow(model, f, f"flows[{k}]")


def _validate_port(model, p, loc, node_ids):
    if p.node not in node_ids:
        raise ModelError(f"{loc}.node", f"unknown node {p.node!r}")
    if p.mechanism is None:
        if model.node(p.node).kind == "switch":
            raise ModelError(f"{loc}.mechanism", "switch ports need a scheduling mechanism")
        return
    if p.id not in {lk.from_port for lk in model.links}:
        raise ModelError(loc, f"port {p.id!r} has no outgoing link")
    C = model.link_rate(p.id)
    kinds = [c.kind for c in p.classes]
    allowed = {
        "CBS": {"CBS"},
        "ATS_CBS": {"CBS"},
        "CBS_CDT": {"CBS", "CDT"},
        "TAS": {"TT"},
        "TAS_CBS": {"TT", "CBS"},
    }[p.mechanism]
    for k, c in enumerate(p.classes):
        if c.kind not in allowed:
            raise ModelError(f"{loc}.classes[{k}].kind", f"{c.kind} classes are not allowed with {p.mechanism}")
    if p.mechanism == "CBS_CDT":
        if kinds.count("CDT") != 1 or kinds[0] != "CDT":
            raise ModelError(f"{loc}.classes", "CBS_CDT ports need exactly one CDT class, listed first")
    elif p.cdt is not None:
        raise ModelError(f"{loc}.cdt", "cdt is only meaningful for CBS_CDT ports")
    if p.mechanism in ("TAS", "TAS_CBS"):
        if p.gcl is None:
            raise ModelError(f"{loc}.gcl", f"{p.mechanism} ports need a gate control list")
        gl = dict(p.gcl.windows)
        if p.mechanism == "TAS_CBS":
            for c in p.classes:
                if c.kind == "CBS" and c.name in gl:
                    raise ModelError(
                        f"{loc}.gcl.windows.{c.name}",
                        "CBS gates open exactly when time-triggered gates are closed; do not list them",
                    )
    elif p.gcl is not None:
        raise ModelError(f"{loc}.gcl", "gcl is only meaningful for TAS and TAS_CBS ports")
    idle_sum = Fraction(0)
    for k, c in enumerate(p.classes):
        if c.kind != "CBS":
            continue
        if c.send_slope is not None and c.idle_slope - c.send_slope != C:
            raise ModelError(
                f"{loc}.classes[{k}].send_slope",
                f"idle_slope - send_slope must equal the link rate {render_exact(C)}",
            )
        idle_sum += c.idle_slope
    if idle_sum >= C:
        raise InfeasibleError(f"{loc}: idle slopes sum to {render_exact(idle_sum)} >= link rate {render_exact(C)}")


def _validate_flow(model, f, loc):
    ports = model._ports
    for k, pid in enumerate(f.path):
        if pid not in ports:
            raise ModelError(f"{loc}.path[{k}]", f"unknown port {pid!r}")
    first = ports[f.path[0]]
    if model.node(first.node).kind != "end-station":
        raise ModelError(f"{loc}.path[0]", "a flow path must start at an end-station port")
    for k, pid in enumerate(f.path):
        if pid not in model._links:
            raise ModelError(f"{loc}.path[{k}]", f"port {pid!r} has no outgoing link")
        if k + 1 < len(f.path):
            nxt = ports[f.path[k + 1]]
            if model.link_of(pid).to != nxt.node:
                raise ModelError(f"{loc}.path[{k + 1}]", f"port {nxt.id!r} is not reached from {pid!r}")
        p = ports[pid]
        if p.mechanism is not None and p.class_entry(f.traffic_class) is None:
            raise ModelError(f"{loc}.class", f"class {f.traffic_class!r} is not configured at port {pid!r}")
        C = model.link_rate(pid)
        if f.m > C * f.cmi:
            raise ModelError(
                loc,
                f"flow {f.id!r} sends {f.m} bits per cmi, more than link {pid!r} carries ({C * f.cmi})",
            )
    if len(set(f.path)) != len(f.path):
        raise ModelError(f"{loc}.path", "a path may not visit a port twice")


def load_model(path) -> NetworkModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError("", f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ModelError("", f"{path}: {exc.strerror}") from None
    return parse_model(doc)


# ---------------------------------------------------------------------------
# serialization


def _q(x):
    return render_exact(x)


def model_to_document(model: NetworkModel) -> dict:
    """Canonical JSON-ready form; ``parse_model`` of the result equals ``model``."""
    ports = []
    for p in model.ports:
        d = {"id": p.id, "node": p.node}
        if p.mechanism is not None:
            d["mechanism"] = p.mechanism
        classes = []
        for c in p.classes:
            cd = {"class": c.name, "kind": c.kind, "max_frame": _q(c.max_frame)}
            if c.idle_slope is not None:
                cd["idle_slope"] = _q(c.idle_slope)
            if c.send_slope is not None:
                cd["send_slope"] = _q(c.send_slope)
            if c.lower_max_frame is not None:
                cd["lower_max_frame"] = _q(c.lower_max_frame)
            classes.append(cd)
        d["classes"] = classes
        d["be_max_frame"] = _q(p.be_max_frame)
        if p.gcl is not None:
            d["gcl"] = {
                "hyperperiod": _q(p.gcl.hyperperiod),
                "windows": {c: [[_q(a), _q(b)] for a, b in ws] for c, ws in p.gcl.windows},
            }
        if p.cdt is not None:
            cd = {"burst": _q(p.cdt.burst), "rate": _q(p.cdt.rate)}
            if p.cdt.lower_max_frame is not None:
                cd["lower_max_frame"] = _q(p.cdt.lower_max_frame)
            d["cdt"] = cd
        d["policy"] = p.policy
        ports.append(d)
    return {
        "nodes": [{"id": n.id, "kind": n.kind} for n in model.nodes],
        "links": [
            {"from": lk.from_port, "to": lk.to, "rate": _q(lk.rate), "technical_delay": _q(lk.technical_delay)}
            for lk in model.links
        ],
        "ports": ports,
        "flows": [
            {
                "id": f.id,
                "cmi": _q(f.cmi),
                "mif": f.mif,
                "mfs": f.mfs,
                "periodic": f.periodic,
                "class": f.traffic_class,
                "path": list(f.path),
                "arrival": f.arrival,
            }
            for f in model.flows
        ],
    }


def cdt_spec_of(port: Port, C, flow_params=()) -> Optional[CdtSpec]:
    """CDT envelope at ``port``: explicit block, or the sum of CDT flows' ``(b, r)``."""
    cls = port.cdt_class()
    if cls is None:
        return None
    lower = port.lower_max_frame(cls.name)
    if port.cdt is not None:
        if port.cdt.lower_max_frame is not None:
            lower = port.cdt.lower_max_frame
        return CdtSpec(port.cdt.burst, port.cdt.rate, lower)
    b = sum((p[0] for p in flow_params), Fraction(0))
    r = sum((p[1] for p in flow_params), Fraction(0))
    return CdtSpec(b, r, lower)
