"""Exception hierarchy shared by the curve core, the engine and the CLI."""


class TsnCalcError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(TsnCalcError, ValueError):
    """A constructor or operation received an invalid parameter."""


class DomainError(ParameterError):
    """A curve was evaluated outside its domain (t < 0)."""


class PreconditionError(TsnCalcError, ValueError):
    """An operation precondition does not hold (e.g. non-monotone time map)."""


class InfeasibleError(TsnCalcError):
    """A configuration is infeasible (bandwidth, utilization, slope set)."""


class UnboundedError(TsnCalcError):
    """A delay, backlog or deconvolution diverges."""


class ModelError(TsnCalcError):
    """A network model document violates the schema.

    ``location`` is a path-like string such as ``flows[2].cmi``.
    """

    def __init__(self, location, message):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
        self.message = message


class ScopeError(TsnCalcError):
    """The simulator was asked to run a model outside its supported scope."""


class CycleError(ModelError):
    """The port dependency graph of a model contains a cycle."""

    def __init__(self, cycle):
        super().__init__("flows", "cyclic port dependency: " + " -> ".join(cycle))
        self.cycle = list(cycle)
