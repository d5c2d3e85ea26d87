"""Service curves for CBS, CBS with control data traffic, TAS and TAS-CBS queues."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InfeasibleError, ParameterError
from .exact import Q
from .minplus import (
    Curve,
    Point,
    Segment,
    affine,
    closure,
    compose,
    deconvolve,
    leaky_bucket,
    maximum,
    minimum,
    rate_latency,
    scale,
    shift_left,
    staircase,
    sum_curves,
    zero,
)

__all__ = [
    "CbsClassConfig",
    "CdtSpec",
    "Gcl",
    "GuaranteedSlots",
    "POLICIES",
    "cbs_max_credit",
    "cbs_service_curve",
    "cdt_busy_time",
    "cdt_service_curve",
    "cdt_output_bound",
    "cbs_cdt_service_curve",
    "guaranteed_slots",
    "tdma_service_curve",
    "tas_service_curve",
    "tt_windows",
    "tt_open_time_bound",
    "tas_cbs_service_curve",
    "ats_cbs_service_curve",
]

POLICIES = ("ideal", "nonpreemptive-blocking")


@dataclass(frozen=True)
class CbsClassConfig:
    """One CBS class. Slopes in bits/s, frame sizes in bits."""

    idle_slope: Fraction
    send_slope: Fraction
    max_frame: Fraction
    lower_max_frame: Fraction
    name: str = ""

    def __post_init__(self):
        for f in ("idle_slope", "send_slope", "max_frame", "lower_max_frame"):
            object.__setattr__(self, f, Q(getattr(self, f)))
        if self.idle_slope <= 0:
            raise ParameterError(f"class {self.name}: idle slope must be positive")
        if self.send_slope >= 0:
            raise ParameterError(f"class {self.name}: send slope must be negative")
        if self.max_frame < 0 or self.lower_max_frame < 0:
            raise ParameterError(f"class {self.name}: frame sizes must be >= 0")

    @property
    def link_rate(self):
        return self.idle_slope - self.send_slope

    @classmethod
    def for_link(cls, idle_slope, C, max_frame, lower_max_frame, name=""):
        idle_slope = Q(idle_slope)
        return cls(idle_slope, idle_slope - Q(C), max_frame, lower_max_frame, name)


@dataclass(frozen=True)
class CdtSpec:
    """Leaky-bucket envelope of control data traffic above all CBS classes."""

    burst: Fraction
    rate: Fraction
    lower_max_frame: Fraction

    def __post_init__(self):
        for f in ("burst", "rate", "lower_max_frame"):
            object.__setattr__(self, f, Q(getattr(self, f)))
        if self.burst < 0 or self.rate < 0 or self.lower_max_frame < 0:
            raise ParameterError("CDT burst, rate and frame size must be >= 0")

    @property
    def is_zero(self):
        return self.burst == 0 and self.rate == 0


def _check_configs(configs, C):
    C = Q(C)
    if C <= 0:
        raise ParameterError("link rate must be positive")
    for k, cfg in enumerate(configs, 1):
        if cfg.link_rate != C:
            raise ParameterError(
                f"class {cfg.name or k}: idle slope - send slope = {cfg.link_rate}, link rate is {C}"
            )
        if cfg.idle_slope >= C:
            raise InfeasibleError(f"class {cfg.name or k}: idle slope must be below the link rate")
    return C


def cbs_max_credit(x: int, configs, C) -> Fraction:
    """Largest credit class ``x`` (1-based, 1 = highest) can reach."""
    C = _check_configs(configs, C)
    if not 1 <= x <= len(configs):
        raise ParameterError(f"class index {x} out of range 1..{len(configs)}")
    higher = configs[: x - 1]
    cfg = configs[x - 1]
    used = sum((h.idle_slope for h in higher), Fraction(0))
    if used >= C:
        raise InfeasibleError(f"idle slopes above class {x} use {used} >= link rate {C}")
    return cfg.idle_slope / (C * (C - used)) * (
        C * cfg.lower_max_frame - sum((h.send_slope * h.max_frame for h in higher), Fraction(0))
    )


def cbs_service_curve(x: int, configs, C) -> Curve:
    """Rate-latency curve with rate ``I`` and latency ``Vmax / I``."""
    v = cbs_max_credit(x, configs, C)
    idle = configs[x - 1].idle_slope
    return rate_latency(idle, v / idle)


def cdt_busy_time(cdt: CdtSpec, C) -> Curve:
    """Upper bound on the time spent sending control data traffic, as an affine curve in seconds."""
    C = Q(C)
    if cdt.rate >= C:
        raise InfeasibleError(f"CDT rate {cdt.rate} must stay below the link rate {C}")
    return affine((cdt.burst + cdt.rate * cdt.lower_max_frame / C) / C, cdt.rate / C)


def cdt_service_curve(cdt: CdtSpec, C) -> Curve:
    """The control data queue waits for at most one lower frame, then gets the full link."""
    C = Q(C)
    return rate_latency(C, cdt.lower_max_frame / C)


def cdt_output_bound(cdt: CdtSpec, C) -> Curve:
    return deconvolve(leaky_bucket(cdt.burst, cdt.rate), cdt_service_curve(cdt, C))


def cbs_cdt_service_curve(x: int, configs, cdt: CdtSpec, C) -> Curve:
    """CBS curve evaluated at ``t - busy(t)``, clamped at zero."""
    C = Q(C)
    base = cbs_service_curve(x, configs, C)
    if cdt is None or cdt.is_zero:
        return base
    if configs[x - 1].idle_slope + cdt.rate >= C:
        raise InfeasibleError(
            f"idle slope {configs[x - 1].idle_slope} plus CDT rate {cdt.rate} reach the link rate {C}"
        )
    busy = cdt_busy_time(cdt, C)
    tmap = maximum(affine(0, 1) + scale(busy, -1), zero())
    return compose(base, tmap)


# ---------------------------------------------------------------------------
# time-aware shaper


@dataclass(frozen=True)
class Gcl:
    """Cyclic gate schedule.

    ``windows`` maps a class to its sorted, disjoint ``(open, close)`` pairs in
    ``[0, hyperperiod]``; ``priority`` lists classes from highest to lowest and
    ``kinds`` tags each class as ``TT``, ``CBS`` or ``BE``.
    """

    hyperperiod: Fraction
    windows: dict
    priority: tuple
    kinds: dict = field(default_factory=dict)

    def __post_init__(self):
        T = Q(self.hyperperiod)
        object.__setattr__(self, "hyperperiod", T)
        if T <= 0:
            raise ParameterError("hyperperiod must be positive")
        clean = {}
        for cls, wins in self.windows.items():
            out = []
            prev = Fraction(0)
            for k, (a, b) in enumerate(wins):
                a, b = Q(a), Q(b)
                if not (0 <= a < b <= T):
                    raise ParameterError(f"class {cls} window {k}: needs 0 <= open < close <= hyperperiod")
                if out and a < prev:
                    raise ParameterError(f"class {cls} windows must be sorted and disjoint")
                out.append((a, b))
                prev = b
            clean[cls] = tuple(out)
        object.__setattr__(self, "windows", clean)
        object.__setattr__(self, "priority", tuple(self.priority))
        for cls in clean:
            if cls not in self.priority:
                raise ParameterError(f"class {cls} has windows but no priority")

    def kind(self, cls):
        return self.kinds.get(cls, "TT")

    def open_windows(self, cls):
        return self.windows.get(cls, ())


@dataclass(frozen=True)
class GuaranteedSlots:
    """Guaranteed slots of one class: ``starts[i]``, ``lengths[i]``, waits ``S[i]``."""

    hyperperiod: Fraction
    starts: tuple
    lengths: tuple

    @property
    def count(self):
        return len(self.starts)

    def max_wait(self, i):
        """Longest wait from a backlog start to slot ``i``: the gap since the previous slot ended."""
        T = self.hyperperiod
        prev = (i - 1) % self.count
        end_prev = self.starts[prev] + self.lengths[prev]
        gap = (self.starts[i] - end_prev) % T
        if self.count == 1 and self.lengths[0] == T:
            return Fraction(0)
        return gap

    def offset(self, j, i):
        """Start-to-start distance from slot ``i`` to slot ``j`` (cyclic)."""
        return (self.starts[j] - self.starts[i]) % self.hyperperiod


def _subtract(intervals, cut):
    out = []
    for a, b in intervals:
        pieces = [(a, b)]
        for c, d in cut:
            nxt = []
            for x, y in pieces:
                if d <= x or c >= y:
                    nxt.append((x, y))
                    continue
                if x < c:
                    nxt.append((x, c))
                if d < y:
                    nxt.append((d, y))
            pieces = nxt
        out.extend(pieces)
    return out


def _merge_cyclic(intervals, T):
    """Sort and merge intervals, joining a window ending at T with one starting at 0."""
    ivs = sorted(intervals)
    merged = []
    for a, b in ivs:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    if len(merged) > 1 and merged[0][0] == 0 and merged[-1][1] == T:
        a, _ = merged.pop()
        b = merged[0][1]
        merged[0] = (a, T + b)
    return merged


def guaranteed_slots(gcl: Gcl, cls, policy="ideal", blocking_frame=0, C=None) -> GuaranteedSlots:
    """Slots of ``cls`` free of higher-priority windows.

    With ``nonpreemptive-blocking`` each slot loses ``blocking_frame / C`` at its
    start, the time a frame started just before the slot may still occupy the link.
    """
    if policy not in POLICIES:
        raise ParameterError(f"unknown slot policy {policy!r}")
    if cls not in gcl.priority:
        raise ParameterError(f"class {cls} is not in the gate schedule")
    T = gcl.hyperperiod
    higher = gcl.priority[: gcl.priority.index(cls)]
    cut = [w for h in higher for w in gcl.open_windows(h)]
    free = _merge_cyclic(_subtract(list(gcl.open_windows(cls)), cut), T)
    loss = Fraction(0)
    if policy == "nonpreemptive-blocking":
        if C is None:
            raise ParameterError("nonpreemptive-blocking needs the link rate")
        loss = Q(blocking_frame) / Q(C)
    starts, lengths = [], []
    full = len(free) == 1 and free[0] == (0, T)
    for a, b in free:
        if full:
            # an always-open gate has no slot boundary to block at
            starts.append(a)
            lengths.append(b - a)
            continue
        a2 = a + loss
        if a2 < b:
            starts.append(a2 % T)
            lengths.append(b - a2)
    order = sorted(range(len(starts)), key=lambda k: starts[k])
    return GuaranteedSlots(T, tuple(starts[k] for k in order), tuple(lengths[k] for k in order))


def tdma_service_curve(T, L, C) -> Curve:
    """``C * max(floor(t/T) L, t - ceil(t/T) (T - L))``."""
    T, L, C = Q(T), Q(L), Q(C)
    if T <= 0 or L <= 0:
        raise ParameterError("TDMA period and slot length must be positive")
    if L > T:
        raise ParameterError(f"slot length {L} exceeds the period {T}")
    if L == T:
        return affine(0, C)
    z = Fraction(0)
    return Curve([Point(z, z), Segment(z, T - L, z, z), Point(T - L, z), Segment(T - L, T, z, C)],
                 0, T, C * L)


def tas_service_curve(slots: GuaranteedSlots, C) -> Curve:
    """Sum of per-slot TDMA curves, minimised over every reference slot."""
    C = Q(C)
    if slots.count == 0:
        return zero()
    T = slots.hyperperiod
    best = None
    for i in range(slots.count):
        Si = slots.max_wait(i)
        parts = []
        for k in range(slots.count):
            j = (i + k) % slots.count
            Lj = slots.lengths[j]
            shift = T - Lj - Si - slots.offset(j, i)
            parts.append(_shifted(tdma_service_curve(T, Lj, C), shift))
        total = sum_curves(parts)
        best = total if best is None else minimum(best, total)
    return best


def _shifted(curve, shift):
    if shift >= 0:
        return shift_left(curve, shift)
    raise ParameterError(f"negative slot shift {shift}; slot data inconsistent")


def tt_windows(gcl: Gcl):
    """Merged open windows of all time-triggered classes."""
    wins = [w for c in gcl.priority if gcl.kind(c) == "TT" for w in gcl.open_windows(c)]
    return _merge_cyclic(wins, gcl.hyperperiod)


def tt_open_time_bound(gcl: Gcl) -> Curve:
    """Most time the time-triggered gates can be open in any window of length t."""
    wins = tt_windows(gcl)
    if not wins:
        return zero()
    T = gcl.hyperperiod
    best = None
    for i in range(len(wins)):
        terms = []
        for j in range(len(wins)):
            L = wins[j][1] - wins[j][0]
            o = (wins[j][0] - wins[i][0]) % T
            terms.append(staircase(L, T, o))
        total = sum_curves(terms)
        best = total if best is None else maximum(best, total)
    return best


def tas_cbs_service_curve(x: int, configs, gcl: Gcl, C) -> Curve:
    """CBS curve evaluated on the running sup of ``u - f(u)``."""
    base = cbs_service_curve(x, configs, C)
    f = tt_open_time_bound(gcl)
    wins = tt_windows(gcl)
    if sum((b - a for a, b in wins), Fraction(0)) >= gcl.hyperperiod:
        return zero()
    avail = closure(affine(0, 1) + scale(f, -1))
    return compose(base, avail)


def ats_cbs_service_curve(x: int, configs, cdt, C) -> Curve:
    """ATS only reshapes traffic; the queue is served exactly like CBS (with CDT if present)."""
    if cdt is None:
        return cbs_service_curve(x, configs, C)
    return cbs_cdt_service_curve(x, configs, cdt, C)
