"""Exception types raised across the package."""

from __future__ import annotations


class PrivDSGDError(Exception):
    """Base class for all package errors."""


# network
class DisconnectedGraph(PrivDSGDError):
    pass


class NonStochasticWeights(PrivDSGDError):
    pass


class DegenerateSpectrum(PrivDSGDError):
    pass


# privacy
class InvalidDelta(PrivDSGDError):
    pass


# problems / oracle
class UnsupportedDim(PrivDSGDError):
    pass


class BatchTooLarge(PrivDSGDError):
    pass


# simulator
class BadHorizon(PrivDSGDError):
    pass


class GammaUndefined(PrivDSGDError):
    pass


class NumericalDivergence(PrivDSGDError):
    """Raised when an iterate leaves the representable working range."""

    def __init__(self, iteration: int, node: int, value: float):
        self.iteration = iteration
        self.node = node
        self.value = value
        super().__init__(
            f"iterate diverged at iteration {iteration} (node {node}, |x|={value:.3e})"
        )


# analysis
class NegativeGap(PrivDSGDError):
    pass


class NonPositiveGap(PrivDSGDError):
    pass


# config
class ConfigError(PrivDSGDError):
    pass


class ParseError(ConfigError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(msg + where)


class UnknownKey(ConfigError):
    def __init__(self, key: str, suggestion: str | None = None):
        self.key = key
        self.suggestion = suggestion
        hint = f"; did you mean {suggestion!r}?" if suggestion else ""
        super().__init__(f"unknown config key {key!r}{hint}")


class MissingRequired(ConfigError):
    pass
