from __future__ import annotations

from .errors import (
    DegreeTooSmall,
    DomainMismatch,
    HdxError,
    InvalidParameter,
    MalformedComplex,
    MissingWitness,
    NegativeWeight,
    NotBoolean,
    NotGlobal,
    PreconditionDelta,
    UnknownSuite,
    ZeroMassPoint,
)
from .measure_space import Fn, PartialAssignment, PartiteUniverse, WeightedComplex
from .records import CheckRecord, Status

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
    "PartiteUniverse",
    "PartialAssignment",
    "WeightedComplex",
    "Fn",
    "CheckRecord",
    "Status",
    "EpsCertificate",
    "certify_epsilon",
    "EfronSteinFamily",
    "es_all",
    "GenSpec",
    "FunctionSpec",
]

_LAZY = {
    "EpsCertificate": "operators",
    "certify_epsilon": "operators",
    "EfronSteinFamily": "decomposition",
    "es_all": "decomposition",
    "GenSpec": "generators",
    "FunctionSpec": "generators",
}


def __getattr__(name: str):
    module = _LAZY.get(name)
    if module is not None:
        from importlib import import_module

        return getattr(import_module(f"{__name__}.{module}"), name)
    raise AttributeError(f"module 'hdx.core' has no attribute {name!r}")
