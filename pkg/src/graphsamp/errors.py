"""Exception types raised across graphsamp."""


class GraphSampError(Exception):
    """Base class for all package errors."""


# graph construction / IO
class EmptyGraph(GraphSampError):
    pass


class IsolatedNode(GraphSampError):
    pass


class DuplicateEdge(GraphSampError):
    pass


class SelfLoop(GraphSampError):
    pass


class ParseError(GraphSampError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class GenerationFailed(GraphSampError):
    pass


# spectral
class DimensionCap(GraphSampError):
    pass


class Breakdown(GraphSampError):
    pass


class NotConverged(GraphSampError):
    pass


class MissingBasis(GraphSampError):
    pass


class InvalidCutoff(GraphSampError):
    pass


# sampling / reconstruction
class BudgetExceedsN(GraphSampError):
    pass


class NotQualified(GraphSampError):
    pass


class MissingGamma(GraphSampError):
    pass


class ShapeMismatch(GraphSampError):
    pass


class DeltaOutOfRange(GraphSampError):
    pass


class ConfigError(GraphSampError):
    pass
