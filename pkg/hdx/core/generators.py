"""Seeded instance generators: complexes with known or certifiable epsilon, and test functions.

Randomness comes from counter-based Philox streams keyed by ``(seed, stream)``
so every piece of an instance can be regenerated independently.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import subsets
from .calculus import globalness
from .decomposition import ApproxESWitness, EfronSteinFamily, es_component
from .errors import InvalidParameter, MalformedComplex, NegativeWeight, NotGlobal
from .measure_space import Fn, PartiteUniverse, WeightedComplex, indicator, lift
from .operators import EpsCertificate, certify_epsilon

logger = logging.getLogger(__name__)

# Stream ids; subset-indexed streams start at _STREAM_SUBSET.
_STREAM_MARGINALS = 1
_STREAM_PERTURBATION = 2
_STREAM_SUPPORT = 3
_STREAM_WEIGHTS = 4
_STREAM_FUNCTION = 5
_STREAM_SUBSET = 64
_STREAM_FAMILY = 4096

ComplexKind = Literal["product", "eta-correlated", "perturbed-product", "sparse-random"]
FunctionKind = Literal[
    "dictator",
    "random-low-degree",
    "random-global-set",
    "random-boolean",
    "gaussian",
    "scattered-set",
]


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream)``."""
    if seed < 0 or seed >= 1 << 64:
        raise InvalidParameter(f"seed {seed} is not a 64-bit unsigned value")
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(stream) << 64)))


def _product_grid(sizes: Sequence[int]) -> np.ndarray:
    return np.indices(tuple(sizes)).reshape(len(sizes), -1).T


def random_marginals(sizes: Sequence[int], seed: int) -> list[np.ndarray]:
    rng = rng_for(seed, _STREAM_MARGINALS)
    out = []
    for n in sizes:
        raw = rng.uniform(0.5, 1.5, size=int(n))
        out.append(raw / raw.sum())
    return out


def gen_product(
    sizes: Sequence[int],
    marginals: Sequence[Sequence[float]] | None = None,
    seed: int | None = None,
) -> WeightedComplex:
    """Product of the given marginals, seeded random ones, or uniform ones when neither is given."""
    if marginals is not None:
        if len(marginals) != len(sizes) or any(len(m) != n for m, n in zip(marginals, sizes)):
            raise MalformedComplex(f"marginals do not match part sizes {list(sizes)}")
        return WeightedComplex.from_product(marginals)
    if seed is None:
        return WeightedComplex.from_product([np.full(int(n), 1.0 / int(n)) for n in sizes])
    return WeightedComplex.from_product(random_marginals(sizes, seed))


def gen_eta_correlated(eta: float) -> WeightedComplex:
    """Two correlated bits: ``mu(00) = mu(11) = (1 + eta)/4``, ``mu(01) = mu(10) = (1 - eta)/4``."""
    if not 0.0 <= eta < 1.0:
        raise InvalidParameter(f"eta={eta} outside [0, 1)")
    same, diff = (1.0 + eta) / 4.0, (1.0 - eta) / 4.0
    return WeightedComplex.build(
        PartiteUniverse.from_sizes([2, 2]),
        [(0, 0), (0, 1), (1, 0), (1, 1)],
        [same, diff, diff, same],
    )


@dataclass(frozen=True, eq=False)
class PerturbedProduct:
    complex: WeightedComplex
    certificate: EpsCertificate


def perturbation_direction(n_faces: int, seed: int) -> np.ndarray:
    return rng_for(seed, _STREAM_PERTURBATION).uniform(-1.0, 1.0, size=n_faces)


def gen_perturbed_product(
    sizes: Sequence[int],
    gamma: float,
    seed: int,
    *,
    uniform: bool = True,
    threads: int = 1,
) -> PerturbedProduct:
    """Product weights times ``1 + gamma * u(face)`` with a seeded direction ``u``."""
    if gamma < 0:
        raise InvalidParameter(f"gamma={gamma} must be >= 0")
    base = gen_product(sizes, seed=None if uniform else seed)
    factor = 1.0 + gamma * perturbation_direction(base.n_faces, seed)
    if np.any(factor <= 0):
        raise NegativeWeight(f"gamma={gamma} drives a face weight to {float(factor.min()):.3e}")
    weights = base.weights * factor
    mu = WeightedComplex.build(base.universe, base.faces, weights / weights.sum())
    cert = certify_epsilon(mu, threads=threads)
    logger.info("Perturbed product sizes=%s gamma=%.4g seed=%d: epsilon=%.6e", list(sizes), gamma, seed, cert.epsilon)
    return PerturbedProduct(mu, cert)


def gen_sparse_random(sizes: Sequence[int], density: float, seed: int) -> WeightedComplex:
    """Random support (each product face kept with probability ``density``) with random weights."""
    if not 0.0 < density <= 1.0:
        raise InvalidParameter(f"density={density} outside (0, 1]")
    grid = _product_grid(sizes)
    keep = rng_for(seed, _STREAM_SUPPORT).random(grid.shape[0]) < density
    if not np.any(keep):
        keep[int(rng_for(seed, _STREAM_SUPPORT + 100).integers(grid.shape[0]))] = True
    weights = rng_for(seed, _STREAM_WEIGHTS).uniform(0.5, 1.5, size=grid.shape[0])[keep]
    return WeightedComplex.build(PartiteUniverse.from_sizes(sizes), grid[keep], weights / weights.sum())


class GenSpec(BaseModel):
    """Reproducible description of a generated complex."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ComplexKind = Field(..., description="Generator family")
    sizes: tuple[int, ...] = Field(default=(2, 2), description="Part sizes |V_1|..|V_k|")
    eta: float = Field(default=0.0, ge=0.0, lt=1.0, description="Correlation of the eta-correlated pair")
    gamma: float = Field(default=0.0, ge=0.0, description="Perturbation scale")
    density: float = Field(default=1.0, gt=0.0, le=1.0, description="Support density for sparse-random")
    uniform: bool = Field(default=True, description="Uniform base marginals (else seeded random ones)")
    seed: int = Field(default=0, ge=0, lt=1 << 64, description="64-bit seed")

    @model_validator(mode="before")
    @classmethod
    def _pair_sizes(cls, data):
        if isinstance(data, dict) and data.get("kind") == "eta-correlated":
            data = {**data, "sizes": (2, 2)}
        return data

    @model_validator(mode="after")
    def _check_shape(self) -> "GenSpec":
        if not self.sizes or len(self.sizes) > subsets.MAX_K:
            raise ValueError(f"need 1..{subsets.MAX_K} parts, got {len(self.sizes)}")
        if any(n < 1 for n in self.sizes):
            raise ValueError(f"part sizes must be >= 1, got {list(self.sizes)}")
        return self

    @property
    def k(self) -> int:
        return len(self.sizes)

    def build(self, *, threads: int = 1) -> WeightedComplex:
        if self.kind == "product":
            return gen_product(self.sizes, seed=None if self.uniform else self.seed)
        if self.kind == "eta-correlated":
            return gen_eta_correlated(self.eta)
        if self.kind == "perturbed-product":
            return gen_perturbed_product(
                self.sizes, self.gamma, self.seed, uniform=self.uniform, threads=threads
            ).complex
        return gen_sparse_random(self.sizes, self.density, self.seed)

    def label(self) -> dict:
        data = {"kind": self.kind, "sizes": list(self.sizes), "seed": self.seed}
        if self.kind == "eta-correlated":
            data["eta"] = self.eta
        if self.kind == "perturbed-product":
            data["gamma"] = self.gamma
        if self.kind == "sparse-random":
            data["density"] = self.density
        if self.kind in ("product", "perturbed-product") and not self.uniform:
            data["uniform"] = False
        return data


class FunctionSpec(BaseModel):
    """Reproducible description of a generated function on top faces."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: FunctionKind
    coord: int = Field(default=0, ge=0, description="Dictator coordinate (0-based)")
    value: int = Field(default=1, ge=0, description="Dictator value")
    d: int = Field(default=1, ge=0, description="Degree for random-low-degree; globalness degree for sets")
    p: float = Field(default=0.1, ge=0.0, le=1.0, description="Coin bias for random sets")
    m: int = Field(default=1, ge=0, description="Face count for scattered-set")
    max_delta: float | None = Field(default=None, gt=0.0, description="Required globalness for random-global-set")
    seed: int = Field(default=0, ge=0, lt=1 << 64)

    def build(self, mu: WeightedComplex) -> Fn:
        return gen_function(self, mu)

    def label(self) -> dict:
        params = {
            "dictator": {"coord": self.coord, "value": self.value},
            "random-low-degree": {"d": self.d},
            "random-global-set": {"p": self.p},
            "random-boolean": {"p": self.p},
            "gaussian": {},
            "scattered-set": {"m": self.m},
        }[self.kind]
        return {"kind": self.kind, "seed": self.seed, **params}


def random_low_degree(mu: WeightedComplex, d: int, seed: int) -> Fn:
    """``sum_{|S| <= d} h_S^{=S}`` for independent Gaussian ``h_S``; exactly degree ``d`` on products."""
    if d > mu.k:
        raise InvalidParameter(f"degree d={d} exceeds k={mu.k}")
    total = np.zeros(mu.n_faces)
    for s in subsets.all_subsets(mu.k, d):
        h = Fn(mu, mu.full, rng_for(seed, _STREAM_SUBSET + s).standard_normal(mu.n_faces))
        total += lift(es_component(mu, h, s)).values
    return Fn(mu, mu.full, total)


def random_set(mu: WeightedComplex, p: float, seed: int) -> Fn:
    coins = rng_for(seed, _STREAM_FUNCTION).random(mu.n_faces) < p
    return Fn(mu, mu.full, coins.astype(np.float64))


def _face_codes(mu: WeightedComplex, faces: np.ndarray) -> np.ndarray:
    strides = np.ones(mu.k, dtype=np.int64)
    sizes = mu.universe.sizes
    for j in range(mu.k - 2, -1, -1):
        strides[j] = strides[j + 1] * sizes[j + 1]
    return faces.astype(np.int64) @ strides


def scattered_set(mu: WeightedComplex, m: int, seed: int) -> Fn:
    """Indicator of ``m`` top faces whose coordinates are pairwise distinct in every part."""
    if m > min(mu.universe.sizes):
        raise InvalidParameter(f"m={m} exceeds the smallest part size {min(mu.universe.sizes)}")
    rng = rng_for(seed, _STREAM_FUNCTION)
    columns = [rng.permutation(n)[:m] for n in mu.universe.sizes]
    candidates = np.stack(columns, axis=1) if m else np.zeros((0, mu.k), dtype=np.int64)
    codes = _face_codes(mu, mu.faces)
    wanted = _face_codes(mu, candidates)
    pos = np.searchsorted(codes, wanted)
    pos = np.minimum(pos, max(mu.n_faces - 1, 0))
    found = codes[pos] == wanted
    chosen = list(pos[found])
    if len(chosen) < m:
        used = [set(int(v) for v in mu.faces[chosen, i]) for i in range(mu.k)]
        for row in rng.permutation(mu.n_faces):
            if len(chosen) == m:
                break
            face = mu.faces[row]
            if all(int(face[i]) not in used[i] for i in range(mu.k)):
                chosen.append(int(row))
                for i in range(mu.k):
                    used[i].add(int(face[i]))
        if len(chosen) < m:
            raise InvalidParameter(f"support has no {m} faces with pairwise distinct coordinates")
    values = np.zeros(mu.n_faces)
    values[np.asarray(chosen, dtype=np.int64)] = 1.0
    return Fn(mu, mu.full, values)


def perturb_family(witness: ApproxESWitness, zeta: float, seed: int) -> ApproxESWitness:
    """Same witnesses, every component moved by ``zeta`` times a seeded Gaussian on its home."""
    if zeta < 0:
        raise InvalidParameter(f"zeta={zeta} must be >= 0")
    family = witness.family
    moved = {}
    for s, comp in family.components.items():
        noise = rng_for(seed, _STREAM_FAMILY + s).standard_normal(comp.values.shape[0])
        moved[s] = comp.with_values(comp.values + zeta * noise)
    return ApproxESWitness(EfronSteinFamily(family.complex, moved), dict(witness.witnesses))


def gen_function(spec: FunctionSpec, mu: WeightedComplex) -> Fn:
    if spec.kind == "dictator":
        if spec.coord >= mu.k or spec.value >= mu.universe.sizes[spec.coord]:
            raise InvalidParameter(f"dictator ({spec.coord}, {spec.value}) is outside the universe")
        return indicator(mu, spec.coord, spec.value)
    if spec.kind == "random-low-degree":
        return random_low_degree(mu, spec.d, spec.seed)
    if spec.kind == "gaussian":
        return Fn(mu, mu.full, rng_for(spec.seed, _STREAM_FUNCTION).standard_normal(mu.n_faces))
    if spec.kind == "scattered-set":
        return scattered_set(mu, spec.m, spec.seed)
    f = random_set(mu, spec.p, spec.seed)
    if spec.kind == "random-global-set":
        report = globalness(mu, f, min(spec.d, mu.k))
        logger.info(
            "Random set p=%.3g seed=%d is (%d, %.4f)-global", spec.p, spec.seed, report.d, report.delta_min
        )
        if spec.max_delta is not None and report.delta_min > spec.max_delta:
            raise NotGlobal(f"sampled set has delta_min={report.delta_min:.4f} > {spec.max_delta}")
    return f


__all__ = [
    "ComplexKind",
    "FunctionKind",
    "rng_for",
    "random_marginals",
    "gen_product",
    "gen_eta_correlated",
    "PerturbedProduct",
    "perturbation_direction",
    "gen_perturbed_product",
    "gen_sparse_random",
    "GenSpec",
    "FunctionSpec",
    "random_low_degree",
    "random_set",
    "scattered_set",
    "perturb_family",
    "gen_function",
]
