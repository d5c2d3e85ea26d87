"""Arrival curves of TSN flows described by their stream reservation contract."""

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
    convolve,
    leaky_bucket,
    minimum,
    scale,
    staircase,
    sum_curves,
)

__all__ = [
    "FlowSpec",
    "simple_parameters",
    "simple_arrival",
    "detailed_periodic_arrival",
    "detailed_aperiodic_legacy",
    "detailed_aperiodic_improved",
    "aggregate_arrivals",
    "capped_leaky_bucket",
]


@dataclass(frozen=True)
class FlowSpec:
    """A flow contract: ``mif`` frames of ``mfs`` bytes per ``cmi`` seconds."""

    id: str
    cmi: Fraction
    mif: int
    mfs: int
    periodic: bool = True
    traffic_class: str = "A"
    path: tuple = field(default_factory=tuple)
    arrival: str = "simple"

    def __post_init__(self):
        object.__setattr__(self, "cmi", Q(self.cmi))
        if self.cmi <= 0:
            raise ParameterError(f"flow {self.id}: cmi must be positive")
        if int(self.mif) != self.mif or self.mif < 1:
            raise ParameterError(f"flow {self.id}: mif must be a positive integer")
        if int(self.mfs) != self.mfs or self.mfs < 1:
            raise ParameterError(f"flow {self.id}: mfs must be a positive integer")
        if self.arrival not in ("simple", "detailed"):
            raise ParameterError(f"flow {self.id}: arrival must be 'simple' or 'detailed'")
        object.__setattr__(self, "path", tuple(self.path))

    @property
    def m(self) -> Fraction:
        """Bits per interval."""
        return Fraction(self.mif * self.mfs * 8)

    @property
    def rate(self) -> Fraction:
        return self.m / self.cmi


def _check_utilization(flow, C):
    C = Q(C)
    if C <= 0:
        raise ParameterError("link rate must be positive")
    if flow.m > C * flow.cmi:
        raise InfeasibleError(
            f"flow {flow.id}: {flow.m} bits per interval exceed link capacity "
            f"{C * flow.cmi} bits per cmi"
        )
    return C


def simple_parameters(flow: FlowSpec, C) -> tuple[Fraction, Fraction]:
    """``(b, r)`` of the leaky-bucket part; aperiodic flows get a doubled burst."""
    C = _check_utilization(flow, C)
    r = flow.rate
    b = flow.m * (1 - r / C)
    if not flow.periodic:
        b *= 2
    return b, r


def capped_leaky_bucket(C, b, r) -> Curve:
    """``min(C t, b + r t)``."""
    return minimum(affine(0, C), leaky_bucket(b, r))


def simple_arrival(flow: FlowSpec, C) -> Curve:
    b, r = simple_parameters(flow, C)
    return capped_leaky_bucket(C, b, r)


def detailed_periodic_arrival(flow: FlowSpec, C) -> Curve:
    """``m * ceil(t / cmi)`` shaped by the link rate."""
    C = _check_utilization(flow, C)
    return convolve(staircase(flow.m, flow.cmi), affine(0, C))


def detailed_aperiodic_legacy(flow: FlowSpec, C) -> Curve:
    """``m * ceil((t + cmi) / cmi)`` shaped by the link rate; kept for comparison."""
    C = _check_utilization(flow, C)
    m, cmi = flow.m, flow.cmi
    # 2m right after 0, then +m at every multiple of cmi
    z = Fraction(0)
    stairs = Curve(
        [Point(z, z), Segment(z, cmi, 2 * m, z), Point(cmi, 2 * m), Segment(cmi, 2 * cmi, 3 * m, z)],
        cmi,
        cmi,
        m,
    )
    return convolve(stairs, affine(0, C))


def detailed_aperiodic_improved(flow: FlowSpec, C) -> Curve:
    """Running sup of ``C (u - [(cmi - m/C) ceil((u - 2m/C) / cmi)]^+)``."""
    C = _check_utilization(flow, C)
    m, cmi = flow.m, flow.cmi
    idle = cmi - m / C
    if idle == 0:
        return affine(0, C)
    # the bracket is (cmi - m/C) times a unit staircase starting at 2m/C
    lost = scale(staircase(1, cmi, 2 * m / C), -C * idle)
    return closure(affine(0, C) + lost)


def aggregate_arrivals(curves) -> Curve:
    curves = list(curves)
    if not curves:
        raise ParameterError("cannot aggregate an empty list of arrival curves")
    return sum_curves(curves)
