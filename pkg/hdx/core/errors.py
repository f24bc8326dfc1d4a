from __future__ import annotations


class HdxError(RuntimeError):
    """Base class for every error raised by the hdx library."""


class MalformedComplex(HdxError):
    """Complex input is inconsistent (bad labels, duplicate faces, weights far from a distribution)."""


class NegativeWeight(MalformedComplex):
    """A face weight is negative, or a perturbation drove one to a non-positive value."""


class ZeroMassPoint(HdxError):
    """A partial assignment lies outside the support of its marginal."""


class DomainMismatch(HdxError):
    """Functions live on different complexes or homes."""


class MissingWitness(HdxError):
    """An approximate Efron-Stein family has a component without its h_S witness."""


class DegreeTooSmall(HdxError):
    """A truncated operator was asked for |S| > d."""


class NotGlobal(HdxError):
    """A function is not (d, delta)-global for the requested delta."""


class NotBoolean(HdxError):
    """A function expected to be an indicator takes values outside {0, 1}."""


class PreconditionDelta(HdxError):
    """delta exceeds the threshold required by the shadow bound."""


class InvalidParameter(HdxError):
    """A numeric parameter is outside its admissible range."""


class UnknownSuite(HdxError):
    """No check suite is registered under the requested name."""


__all__ = [
    "HdxError",
    "MalformedComplex",
    "NegativeWeight",
    "ZeroMassPoint",
    "DomainMismatch",
    "MissingWitness",
    "DegreeTooSmall",
    "NotGlobal",
    "NotBoolean",
    "PreconditionDelta",
    "InvalidParameter",
    "UnknownSuite",
]
