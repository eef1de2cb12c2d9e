"""Exception hierarchy shared by every module."""

from __future__ import annotations


class InfoAggError(Exception):
    """Base class for all errors raised by infoagg."""


class EmptyWeights(InfoAggError, ValueError):
    pass


class NegativeWeight(InfoAggError, ValueError):
    pass


class ZeroMass(InfoAggError, ValueError):
    pass


class SpaceMismatch(InfoAggError, ValueError):
    """A variable or partition does not live on the space it is used with."""


class SizeMismatch(InfoAggError, ValueError):
    pass


class DomainError(InfoAggError, ValueError):
    """An input lies outside the domain of a transform."""


class WeightMismatch(InfoAggError, ValueError):
    pass


class SingularCovariance(InfoAggError, ValueError):
    pass


class EmptyMenu(InfoAggError, ValueError):
    pass


class InvalidConfig(InfoAggError, ValueError):
    pass


class NonTrivialityError(InvalidConfig):
    """Both private signals are degenerate, so the forecasters never disagree."""


class BoundaryOmega(InfoAggError, ValueError):
    pass


class DepthTooSmall(InfoAggError, ValueError):
    pass


class NonPositiveWeight(InfoAggError, ValueError):
    pass


class JamisonViolation(InfoAggError):
    """The weight sequence fails the counting-function consistency condition."""
