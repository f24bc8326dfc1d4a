"""JSON file formats for complexes, functions, certificates, families and reports."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator

from hdx.core import subsets
from hdx.core.calculus import GlobalnessReport
from hdx.core.decomposition import ApproxESWitness, EfronSteinFamily
from hdx.core.errors import DomainMismatch
from hdx.core.measure_space import Fn, PartiteUniverse, WeightedComplex
from hdx.core.operators import EpsCertificate, SkeletonWitness
from hdx.core.records import CheckRecord, Status


class ComplexFile(BaseModel):
    parts: List[List[str]] = Field(..., description="Vertex labels of V_1..V_k")
    faces: List[List[int]] = Field(..., description="Top faces as element indices, one per part")
    weights: List[float] = Field(..., description="Face weights (normalized on load)")
    complex_id: str | None = Field(default=None, description="Content hash written on save")
    spec: Dict[str, Any] | None = Field(default=None, description="Generator description, when generated")

    @field_validator("parts")
    @classmethod
    def _at_least_one_part(cls, parts: List[List[str]]) -> List[List[str]]:
        if not parts:
            raise ValueError("a complex file needs k >= 1 parts")
        return parts

    def to_complex(self) -> WeightedComplex:
        universe = PartiteUniverse(tuple(tuple(p) for p in self.parts))
        return WeightedComplex.build(universe, np.asarray(self.faces, dtype=np.int64), self.weights)

    @classmethod
    def from_complex(cls, mu: WeightedComplex, spec: Dict[str, Any] | None = None) -> "ComplexFile":
        return cls(
            parts=[list(p) for p in mu.universe.parts],
            faces=mu.faces.tolist(),
            weights=mu.weights.tolist(),
            complex_id=mu.complex_id,
            spec=spec,
        )


class FunctionFile(BaseModel):
    home: List[int] = Field(..., description="0-based coordinates of the home subset")
    values: List[float] = Field(..., description="Values in canonical point order of mu_home")
    complex_id: str | None = Field(default=None, description="Complex the values are aligned to")
    spec: Dict[str, Any] | None = Field(default=None, description="Generator description, when generated")

    def to_fn(self, mu: WeightedComplex) -> Fn:
        if self.complex_id is not None and self.complex_id != mu.complex_id:
            raise DomainMismatch(f"function file targets complex {self.complex_id}, got {mu.complex_id}")
        return Fn(mu, subsets.mask_from(self.home), np.asarray(self.values, dtype=np.float64))

    @classmethod
    def from_fn(cls, f: Fn, spec: Dict[str, Any] | None = None) -> "FunctionFile":
        return cls(
            home=list(subsets.bits(f.home)),
            values=f.values.tolist(),
            complex_id=f.complex.complex_id,
            spec=spec,
        )


class WitnessEntry(BaseModel):
    subset: List[int] = Field(..., description="Fixed coordinates of the link")
    values: List[int] = Field(..., description="Fixed element indices")
    pair: List[int] = Field(..., description="Skeleton coordinates (i, j)")
    sigma: float = Field(..., description="Second singular value of the skeleton")

    @classmethod
    def from_witness(cls, witness: SkeletonWitness) -> "WitnessEntry":
        return cls(**witness.to_dict())


class CertificateFile(BaseModel):
    complex_id: str
    epsilon: float = Field(..., description="Largest skeleton second singular value")
    n_witnesses: int
    witnesses: List[WitnessEntry] = Field(default_factory=list, description="Largest witnesses first")

    @classmethod
    def from_certificate(cls, cert: EpsCertificate, top: int | None = None) -> "CertificateFile":
        chosen = cert.top(len(cert.witnesses) if top is None else top)
        return cls(
            complex_id=cert.complex_id,
            epsilon=cert.epsilon,
            n_witnesses=len(cert.witnesses),
            witnesses=[WitnessEntry.from_witness(w) for w in chosen],
        )


class FamilyFile(BaseModel):
    complex_id: str
    components: Dict[str, List[float]] = Field(..., description="Subset bitmask -> values on supp mu_S")
    alpha: float | None = None
    eps_prime: float | None = None
    beta: float | None = None

    @classmethod
    def from_family(cls, family: EfronSteinFamily, witness: ApproxESWitness | None = None) -> "FamilyFile":
        params = witness.declared() if witness is not None else None
        beta = None if params is None or math.isinf(params.beta) else params.beta
        return cls(
            complex_id=family.complex.complex_id,
            components={str(s): comp.values.tolist() for s, comp in family.components.items()},
            alpha=params.alpha if params else None,
            eps_prime=params.eps_prime if params else None,
            beta=beta,
        )

    def to_family(self, mu: WeightedComplex) -> EfronSteinFamily:
        if self.complex_id != mu.complex_id:
            raise DomainMismatch(f"family file targets complex {self.complex_id}, got {mu.complex_id}")
        return EfronSteinFamily(
            mu, {int(s): Fn(mu, int(s), np.asarray(v, dtype=np.float64)) for s, v in self.components.items()}
        )


class GlobalnessFile(BaseModel):
    complex_id: str
    d: int
    delta_min: float
    witness_subset: List[int]
    witness_values: List[int]

    @classmethod
    def from_report(cls, mu: WeightedComplex, report: GlobalnessReport) -> "GlobalnessFile":
        return cls(complex_id=mu.complex_id, **report.to_dict())


class CheckRecordModel(BaseModel):
    check_id: str
    variant: str
    instance: Dict[str, Any] | None = None
    detail: Dict[str, Any] = Field(default_factory=dict)
    lhs: float | str
    rhs_explicit: float | str
    residual: float | str
    residual_ratio: float | str | None = None
    ceiling: float | str | None = None
    within_ceiling: bool | None = None
    status: Literal["PASS", "REPORT", "FAIL"]
    runtime_ms: float = 0.0

    def to_record(self) -> CheckRecord:
        def num(value: float | str | None) -> float | None:
            return None if value is None else float(value)

        return CheckRecord(
            check_id=self.check_id,
            variant=self.variant,
            lhs=num(self.lhs),
            rhs_explicit=num(self.rhs_explicit),
            residual=num(self.residual),
            residual_ratio=num(self.residual_ratio),
            status=Status(self.status),
            detail=dict(self.detail),
            ceiling=num(self.ceiling),
            instance=self.instance,
            runtime_ms=self.runtime_ms,
        )


class ReportHeader(BaseModel):
    kind: Literal["header"] = "header"
    suite: str
    version: str
    config_hash: str
    records: int
    counts: Dict[str, int] = Field(default_factory=dict, description="Records per status")


def write_json(path: Path, payload: BaseModel | Dict[str, Any] | List[Any]) -> Path:
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _read(path: Path) -> Any:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        return json.load(handle)


def load_complex(path: Path) -> WeightedComplex:
    return ComplexFile.model_validate(_read(path)).to_complex()


def save_complex(path: Path, mu: WeightedComplex, spec: Dict[str, Any] | None = None) -> Path:
    return write_json(path, ComplexFile.from_complex(mu, spec))


def load_function(path: Path, mu: WeightedComplex) -> Fn:
    return FunctionFile.model_validate(_read(path)).to_fn(mu)


def save_function(path: Path, f: Fn, spec: Dict[str, Any] | None = None) -> Path:
    return write_json(path, FunctionFile.from_fn(f, spec))


__all__ = [
    "ComplexFile",
    "FunctionFile",
    "WitnessEntry",
    "CertificateFile",
    "FamilyFile",
    "GlobalnessFile",
    "CheckRecordModel",
    "ReportHeader",
    "write_json",
    "load_complex",
    "save_complex",
    "load_function",
    "save_function",
]
