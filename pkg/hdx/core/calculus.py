"""Laplacians, derivatives, influences and globalness.

Influences are squared link norms: ``I_{S,x}[f] = ||L_S[f](x, .)||^2``.
Profiles use the identity ``I_{S,x} = A_S[(L_S f)^2](x)`` so no link has to be
materialized; :func:`influence` builds the link explicitly and is the
reference the profile is tested against.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from . import subsets
from .decomposition import (
    ApproxESWitness,
    EfronSteinFamily,
    es_all,
    validate_approx_es,
    with_parameters,
)
from .errors import DegreeTooSmall, InvalidParameter, NotGlobal
from .measure_space import (
    Fn,
    PartialAssignment,
    WeightedComplex,
    expectation,
    link_rows,
    norm2,
    norm_p,
    restrict_fix,
    restrict_to_junta,
)
from .operators import average_to, avg
from .records import EPSILON_FLOOR, CheckRecord, bound_record, residual_record

logger = logging.getLogger(__name__)


def laplacian(mu: WeightedComplex, f: Fn, subset: int) -> Fn:
    """``L_S[f] = sum_{T <= S} (-1)^{|T|} A_{[k] \\ T} f``."""
    subsets.validate(subset, mu.k)
    total = np.zeros(mu.n_faces)
    for t in subsets.subsets_of(subset):
        sign = -1.0 if subsets.size(t) % 2 else 1.0
        total += sign * average_to(mu, f, mu.full & ~t).values
    return Fn(mu, mu.full, total)


def laplacian_via_components(
    mu: WeightedComplex, f: Fn, subset: int, family: EfronSteinFamily | None = None
) -> Fn:
    """``sum_{T >= S} f^{=T}``."""
    family = family or es_all(mu, f)
    return family.total(lambda t: subsets.is_subset(subset, t))


def laplacian_trunc(
    mu: WeightedComplex, f: Fn, subset: int, d: int, family: EfronSteinFamily | None = None
) -> Fn:
    """``L_S^{<=d}[f] = sum_{T >= S, |T| <= d} f^{=T}``."""
    if subsets.size(subset) > d:
        raise DegreeTooSmall(f"|{subsets.fmt(subset)}| > d={d}")
    family = family or es_all(mu, f)
    return family.total(lambda t: subsets.is_subset(subset, t) and subsets.size(t) <= d)


def _check_point(subset: int, x: PartialAssignment) -> None:
    if x.subset != subset:
        raise InvalidParameter(f"assignment is on {subsets.fmt(x.subset)}, expected {subsets.fmt(subset)}")


def derivative(mu: WeightedComplex, f: Fn, subset: int, x: PartialAssignment) -> Fn:
    """``D_{S,x}[f] = L_S[f](x, .)`` on the link ``mu_x``."""
    _check_point(subset, x)
    return restrict_fix(laplacian(mu, f, subset), x)


def derivative_trunc(
    mu: WeightedComplex,
    f: Fn,
    subset: int,
    x: PartialAssignment,
    d: int,
    family: EfronSteinFamily | None = None,
) -> Fn:
    _check_point(subset, x)
    return restrict_fix(laplacian_trunc(mu, f, subset, d, family), x)


def influence(mu: WeightedComplex, f: Fn, subset: int, x: PartialAssignment) -> float:
    return norm2(derivative(mu, f, subset, x)) ** 2


def influence_trunc(
    mu: WeightedComplex, f: Fn, subset: int, x: PartialAssignment, d: int
) -> float:
    return norm2(derivative_trunc(mu, f, subset, x, d)) ** 2


def influences_via_averages(mu: WeightedComplex, lap: Fn, subset: int) -> Fn:
    """``x -> A_S[(L_S f)^2](x)``, the influence table over ``supp mu_S``."""
    return avg(mu, lap.square(), subset)


@dataclass(frozen=True, eq=False)
class InfluenceProfile:
    subset: int
    d: int
    points: np.ndarray
    masses: np.ndarray
    influence: np.ndarray
    influence_trunc: np.ndarray

    def _mean(self, values: np.ndarray) -> float:
        return float(np.add.reduce(self.masses * values))

    @property
    def mean(self) -> float:
        return self._mean(self.influence)

    @property
    def mean_sq(self) -> float:
        return self._mean(self.influence**2)

    @property
    def max(self) -> float:
        return float(np.max(self.influence))

    @property
    def mean_trunc(self) -> float:
        return self._mean(self.influence_trunc)

    @property
    def mean_sq_trunc(self) -> float:
        return self._mean(self.influence_trunc**2)

    def rows(self) -> Iterator[tuple[str, str, float, float]]:
        label = subsets.fmt(self.subset)
        for point, value, trunc in zip(self.points, self.influence, self.influence_trunc):
            yield label, ",".join(str(int(v)) for v in point), float(value), float(trunc)


def influence_profile(
    mu: WeightedComplex,
    f: Fn,
    subset: int,
    d: int,
    family: EfronSteinFamily | None = None,
) -> InfluenceProfile:
    family = family or es_all(mu, f)
    full = influences_via_averages(mu, laplacian(mu, f, subset), subset)
    if subsets.size(subset) <= d:
        trunc = influences_via_averages(mu, laplacian_trunc(mu, f, subset, d, family), subset).values
    else:
        trunc = np.zeros_like(full.values)
    proj = mu.projection(subset)
    return InfluenceProfile(
        subset=subset,
        d=d,
        points=proj.points,
        masses=proj.masses,
        influence=np.maximum(full.values, 0.0),
        influence_trunc=np.maximum(trunc, 0.0),
    )


def influence_sum(mu: WeightedComplex, f: Fn) -> float:
    """``sum_S E_x I_{S,x}[f] = sum_S ||L_S f||^2``."""
    return math.fsum(norm2(laplacian(mu, f, s)) ** 2 for s in range(1 << mu.k))


def max_influence(mu: WeightedComplex, f: Fn, d: int) -> float:
    """Smallest delta with ``I_{S,x}[f] <= delta`` for all ``|S| <= d``."""
    best = 0.0
    for s in subsets.all_subsets(mu.k, d):
        table = influences_via_averages(mu, laplacian(mu, f, s), s)
        best = max(best, float(np.max(table.values)))
    return best


@dataclass(frozen=True)
class GlobalnessReport:
    d: int
    delta_min: float
    witness_subset: int
    witness_point: PartialAssignment

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "delta_min": self.delta_min,
            "witness_subset": list(subsets.bits(self.witness_subset)),
            "witness_values": list(self.witness_point.values),
        }


def restriction_norms(mu: WeightedComplex, f: Fn, subset: int) -> np.ndarray:
    """``||f(x, .)||_{L2(mu_x)}`` for each ``x`` in ``supp mu_S``."""
    return np.sqrt(np.maximum(avg(mu, f.square(), subset).values, 0.0))


def globalness(mu: WeightedComplex, f: Fn, d: int) -> GlobalnessReport:
    """Minimal delta for which ``f`` is (d, delta)-global, with its first witness."""
    if d < 0 or d > mu.k:
        raise InvalidParameter(f"d={d} outside [0, {mu.k}]")
    best, best_subset, best_index = -1.0, 0, 0
    for s in subsets.by_size(mu.k, d):
        norms = restriction_norms(mu, f, s)
        index = int(np.argmax(norms))
        if norms[index] > best:
            best, best_subset, best_index = float(norms[index]), s, index
    point = tuple(int(v) for v in mu.projection(best_subset).points[best_index])
    return GlobalnessReport(d, best, best_subset, PartialAssignment(best_subset, point))


def require_global(mu: WeightedComplex, f: Fn, d: int, delta: float) -> GlobalnessReport:
    report = globalness(mu, f, d)
    if report.delta_min > delta * (1.0 + 1e-12) + 1e-15:
        raise NotGlobal(
            f"function is not ({d}, {delta:.3e})-global: restriction at "
            f"{report.witness_point.encode()} has norm {report.delta_min:.3e}"
        )
    return report


def check_global_components(
    mu: WeightedComplex,
    f: Fn,
    d: int,
    delta: float,
    *,
    family: EfronSteinFamily | None = None,
) -> list[CheckRecord]:
    """Sup-norm bound ``||f^{=T}||_inf <= 2^|T| delta`` for every ``|T| <= d``."""
    require_global(mu, f, d, delta)
    family = family or es_all(mu, f)
    return [
        bound_record(
            "C13-global-component",
            "sup-norm",
            norm_p(family[t], math.inf),
            2.0 ** subsets.size(t) * delta,
            detail={"T": subsets.fmt(t), "d": d},
        )
        for t in subsets.by_size(mu.k, d)
    ]


def check_influence_bounds(
    mu: WeightedComplex,
    f: Fn,
    d: int,
    delta: float,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    family: EfronSteinFamily | None = None,
) -> list[CheckRecord]:
    """Second moments of the (truncated) influences of a ``(d, delta)``-global ``f``."""
    require_global(mu, f, d, delta)
    family = family or es_all(mu, f)
    norm4 = norm_p(f, 4.0) ** 4
    scale_trunc = norm_p(f, math.inf) ** 2 * norm2(f) ** 2
    records: list[CheckRecord] = []
    for t in subsets.by_size(mu.k, d):
        detail = {"T": subsets.fmt(t), "d": d}
        profile = influence_profile(mu, f, t, d, family)
        records.append(
            residual_record(
                "C14-influence-bounds",
                "second-moment",
                profile.mean_sq,
                2.0 ** (d + 1) * delta**2 * profile.mean,
                epsilon**2 * norm4,
                epsilon,
                ceiling=ceiling,
                epsilon_floor=epsilon_floor,
                detail=detail,
            )
        )
        records.append(
            residual_record(
                "C14-influence-bounds",
                "second-moment-trunc",
                profile.mean_sq_trunc,
                2.0 ** (d + 4) * delta**2 * profile.mean_trunc,
                epsilon**2 * scale_trunc,
                epsilon,
                ceiling=ceiling,
                epsilon_floor=epsilon_floor,
                detail=detail,
            )
        )
    return records


def check_global_bounds(
    mu: WeightedComplex,
    f: Fn,
    d: int,
    delta: float,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    family: EfronSteinFamily | None = None,
) -> list[CheckRecord]:
    """Component sup-norm bound and the influence second-moment bounds for every ``|T| <= d``."""
    family = family or es_all(mu, f)
    records = check_global_components(mu, f, d, delta, family=family)
    records.extend(
        check_influence_bounds(
            mu, f, d, delta, epsilon, ceiling=ceiling, epsilon_floor=epsilon_floor, family=family
        )
    )
    return records


def derivative_es_family(mu: WeightedComplex, f: Fn, subset: int) -> ApproxESWitness:
    """``f_S(x, y) = D_{T,x}^{=S \\ T}[f](y)`` for ``S >= T``, validated against ``L_T[f]``.

    Each link ``mu_x`` (``x`` in ``supp mu_T``) gets its own Efron-Stein
    decomposition of the derivative; components are written back onto the
    faces through ``x`` and reduced to home ``S``.
    """
    lap = laplacian(mu, f, subset)
    rest = subsets.bits(mu.full & ~subset)
    supersets = list(subsets.supersets_within(subset, mu.k))
    columns = {s: np.zeros(mu.n_faces) for s in supersets}
    for x in mu.assignments(subset):
        rows, link_complex = link_rows(mu, x)
        local = es_all(link_complex, Fn(link_complex, link_complex.full, lap.values[rows]))
        for s in supersets:
            piece = local.get(subsets.relative(s & ~subset, rest))
            columns[s][rows] = piece.values[link_complex.coarsening(link_complex.full, piece.home)]
    family = EfronSteinFamily(
        mu, {s: restrict_to_junta(Fn(mu, mu.full, columns[s]), s) for s in supersets}
    )
    witness = ApproxESWitness(family, {s: f for s in supersets})
    params = validate_approx_es(mu, lap, witness)
    logger.debug(
        "Derivative family for T=%s: alpha=%.3e eps'=%.3e beta=%.3e",
        subsets.fmt(subset),
        *params,
    )
    return with_parameters(witness, params)


def check_derivative_family(
    mu: WeightedComplex,
    f: Fn,
    subset: int,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    family: EfronSteinFamily | None = None,
) -> list[CheckRecord]:
    """Distance of the derivative family from ``{f^{=S}}``, relative to ``eps ||f||``."""
    family = family or es_all(mu, f)
    witness = derivative_es_family(mu, f, subset)
    nf = norm2(f)
    records = []
    for s, comp in witness.family.components.items():
        gap = norm2(comp - family[s])
        records.append(
            residual_record(
                "C21-derivative-family",
                "component-gap",
                gap,
                0.0,
                epsilon * nf,
                epsilon,
                ceiling=ceiling,
                epsilon_floor=epsilon_floor,
                detail={"T": subsets.fmt(subset), "S": subsets.fmt(s)},
            )
        )
    return records


__all__ = [
    "laplacian",
    "laplacian_via_components",
    "laplacian_trunc",
    "derivative",
    "derivative_trunc",
    "influence",
    "influence_trunc",
    "influences_via_averages",
    "InfluenceProfile",
    "influence_profile",
    "influence_sum",
    "max_influence",
    "GlobalnessReport",
    "restriction_norms",
    "globalness",
    "require_global",
    "check_global_components",
    "check_influence_bounds",
    "check_global_bounds",
    "derivative_es_family",
    "check_derivative_family",
]
