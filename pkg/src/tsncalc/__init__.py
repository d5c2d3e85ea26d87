"""Exact network-calculus bounds for TSN scheduler configurations.

Curves are ultimately pseudo-periodic piecewise-linear functions with rational
breakpoints (:mod:`tsncalc.minplus`). On top of them sit TSN arrival curves
(:mod:`tsncalc.arrival`), per-mechanism service curves (:mod:`tsncalc.service`),
bounds and hop-by-hop network analysis (:mod:`tsncalc.bounds`), the model
file format (:mod:`tsncalc.model`) and the validation tooling
(:mod:`tsncalc.oracle`, :mod:`tsncalc.sim`).
"""

from .bounds import analyze_network, analyze_queue, backlog_bound, delay_bound, output_bound
from .errors import (
    CycleError,
    DomainError,
    InfeasibleError,
    ModelError,
    ParameterError,
    PreconditionError,
    ScopeError,
    TsnCalcError,
    UnboundedError,
)
from .model import load_model, model_to_document, parse_model

__version__ = "0.1.0"

__all__ = [
    "analyze_network",
    "analyze_queue",
    "backlog_bound",
    "delay_bound",
    "output_bound",
    "load_model",
    "parse_model",
    "model_to_document",
    "TsnCalcError",
    "ParameterError",
    "DomainError",
    "PreconditionError",
    "InfeasibleError",
    "UnboundedError",
    "ModelError",
    "CycleError",
    "ScopeError",
]
