"""Instance grids for the check suites and a shared cache of built complexes."""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

from hdx.core.generators import FunctionSpec, GenSpec
from hdx.core.measure_space import Fn, WeightedComplex
from hdx.core.operators import certify_epsilon
from hdx.core.skeleton_cache import SkeletonCache

from .config_loader import SuiteConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Case:
    """One (complex, function) pair a catalog entry is evaluated on.

    ``role`` names the grid the case came from; entries that behave differently
    on different grids dispatch on it.
    """

    role: str
    spec: GenSpec
    function: FunctionSpec
    d: int
    partner: FunctionSpec | None = None

    def label(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "role": self.role,
            "complex": self.spec.label(),
            "function": self.function.label(),
            "d": self.d,
        }
        if self.partner is not None:
            data["partner"] = self.partner.label()
        return data


class InstanceStore:
    """Builds each complex once per run and remembers its certified epsilon."""

    def __init__(self, config: SuiteConfig) -> None:
        self._config = config
        self._lock = threading.Lock()
        self._complexes: Dict[GenSpec, WeightedComplex] = {}
        self._building: Dict[GenSpec, threading.Lock] = {}
        self._epsilons: Dict[str, float] = {}
        cache_path = config.runtime.skeleton_cache
        self.skeleton_cache = SkeletonCache(Path(cache_path) if cache_path else None)

    def complex_for(self, spec: GenSpec) -> WeightedComplex:
        with self._lock:
            hit = self._complexes.get(spec)
            if hit is not None:
                return hit
            gate = self._building.setdefault(spec, threading.Lock())
        with gate:
            with self._lock:
                hit = self._complexes.get(spec)
            if hit is not None:
                return hit
            mu = spec.build(threads=self._config.runtime.threads)
            logger.debug("Built %s complex %s with %d faces", spec.kind, mu.complex_id, mu.n_faces)
            with self._lock:
                self._complexes[spec] = mu
            return mu

    def epsilon_for(self, spec: GenSpec, mu: WeightedComplex) -> float:
        with self._lock:
            hit = self._epsilons.get(mu.complex_id)
        if hit is not None:
            return hit
        limit = self._config.runtime.certify_max_faces
        if spec.kind == "product" and mu.n_faces > limit:
            logger.info(
                "Product complex %s has %d faces (> %d): epsilon = 0 by construction",
                mu.complex_id,
                mu.n_faces,
                limit,
            )
            epsilon = 0.0
        else:
            epsilon = certify_epsilon(
                mu, threads=self._config.runtime.threads, cache=self.skeleton_cache
            ).epsilon
        with self._lock:
            self._epsilons[mu.complex_id] = epsilon
        return epsilon

    def function_for(self, case: Case, mu: WeightedComplex) -> Fn:
        return case.function.build(mu)

    def partner_for(self, case: Case, mu: WeightedComplex) -> Fn:
        spec = case.partner or FunctionSpec(kind="gaussian", seed=case.function.seed + 1)
        return spec.build(mu)

    def flush(self) -> None:
        self.skeleton_cache.flush()


def exact_grid(config: SuiteConfig) -> List[Case]:
    """Seeded pairs cycling through every complex family (gaussian functions)."""
    grids = config.grids
    cases = []
    kinds = ("product", "eta-correlated", "perturbed-product", "sparse-random")
    for i in range(grids.exact_pairs):
        kind = kinds[i % len(kinds)]
        sizes = tuple(grids.exact_sizes[(i // len(kinds)) % len(grids.exact_sizes)])
        spec = GenSpec(
            kind=kind,
            sizes=sizes,
            eta=grids.etas[i % len(grids.etas)],
            gamma=grids.gammas[i % len(grids.gammas)],
            density=grids.sparse_density,
            uniform=kind != "product",
            seed=i + 1,
        )
        cases.append(Case("exact", spec, FunctionSpec(kind="gaussian", seed=i + 1), d=1))
    return cases


def _low_degree_cases(role: str, spec: GenSpec, degrees: List[int], seed: int) -> List[Case]:
    return [
        Case(role, spec, FunctionSpec(kind="random-low-degree", d=d, seed=seed), d=d)
        for d in degrees
        if d <= spec.k
    ]


def product_grid(config: SuiteConfig) -> List[Case]:
    """Exact products (random marginals) plus the uniform cube, with constructed low-degree functions."""
    grids = config.grids
    cases = []
    for sizes in grids.product_sizes:
        for seed in grids.seeds:
            spec = GenSpec(kind="product", sizes=tuple(sizes), uniform=False, seed=seed)
            cases.extend(_low_degree_cases("product", spec, grids.degrees, seed))
    cube = GenSpec(kind="product", sizes=(2, 2, 2), uniform=True)
    for seed in grids.seeds:
        cases.extend(_low_degree_cases("product", cube, grids.degrees, seed))
    return cases


def eps_grid(config: SuiteConfig) -> List[Case]:
    """Eta-correlated pairs and perturbed products with certified epsilon > 0."""
    grids = config.grids
    cases = []
    for eta in grids.etas:
        spec = GenSpec(kind="eta-correlated", eta=eta)
        for seed in grids.seeds:
            cases.extend(_low_degree_cases("eps", spec, grids.degrees, seed))
    for sizes in grids.perturbed_sizes:
        for gamma in grids.gammas:
            for seed in grids.seeds:
                spec = GenSpec(kind="perturbed-product", sizes=tuple(sizes), gamma=gamma, seed=seed)
                cases.extend(_low_degree_cases("eps", spec, grids.degrees, seed))
    return cases


def global_set_grid(config: SuiteConfig) -> List[Case]:
    grids = config.grids
    spec = GenSpec(kind="product", sizes=tuple(grids.global_sizes), uniform=True)
    return [
        Case("global-set", spec, FunctionSpec(kind="random-global-set", p=p, d=1, seed=seed), d=1)
        for p in grids.global_p
        for seed in grids.seeds
    ]


def control_grid(config: SuiteConfig) -> List[Case]:
    """Dictator on the uniform cube: the function the global bounds must not cover."""
    spec = GenSpec(kind="product", sizes=(2, 2, 2), uniform=True)
    return [Case("control", spec, FunctionSpec(kind="dictator", coord=0, value=1), d=1)]


def kk_grid(config: SuiteConfig) -> List[Case]:
    grids = config.grids
    spec = GenSpec(kind="product", sizes=tuple(grids.kk_sizes), uniform=True)
    return [
        Case("kk", spec, FunctionSpec(kind="scattered-set", m=grids.kk_set_size, seed=seed), d=1)
        for seed in grids.kk_seeds
    ]


GRIDS = {
    "exact": exact_grid,
    "product": product_grid,
    "eps": eps_grid,
    "global-set": global_set_grid,
    "control": control_grid,
    "kk": kk_grid,
}


__all__ = [
    "Case",
    "InstanceStore",
    "exact_grid",
    "product_grid",
    "eps_grid",
    "global_set_grid",
    "control_grid",
    "kk_grid",
    "GRIDS",
]
