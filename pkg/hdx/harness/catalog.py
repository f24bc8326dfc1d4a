"""The check catalog: every inequality and identity the harness verifies.

Each :class:`CatalogEntry` turns one :class:`~hdx.harness.instances.Case`
into a list of records.  The table is frozen in
``config/catalog_manifest.json``; the coverage test compares the two.
"""
from __future__ import annotations

import itertools
import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from typing import Dict, List, Tuple

from hdx.core import subsets
from hdx.core.calculus import (
    check_derivative_family,
    check_global_components,
    check_influence_bounds,
    derivative_es_family,
    globalness,
    laplacian,
    laplacian_via_components,
)
from hdx.core.decomposition import (
    check_component_norm,
    check_idempotence,
    check_junta_orthogonality,
    check_l4_closeness,
    check_near_orthogonality,
    check_parseval,
    check_strong_parseval,
    es_all,
    exact_witness,
    low_degree,
    low_degree_family,
    natural_laplacian_family,
    validate_approx_es,
)
from hdx.core.generators import perturb_family
from hdx.core.hypercontractivity import check_hdx_hypercontractivity, check_product_hypercontractivity
from hdx.core.measure_space import Fn, WeightedComplex
from hdx.core.operators import (
    average_to,
    avg,
    check_composition,
    check_contraction,
    check_disjoint_avg,
    check_intersection_avg,
)
from hdx.core.records import CheckRecord, identity_record, report_record
from hdx.core.walks import (
    check_fourier_concentration,
    check_kk,
    check_sse,
    noise_direct,
    noise_lemma_check,
    noise_spectral,
    sse_negative_control,
    updown,
    updown_spectral,
)

from .config_loader import SuiteConfig
from .instances import Case, InstanceStore

logger = logging.getLogger(__name__)

# Pair sweeps stay within subsets of this size.
PAIR_MAX_SIZE = 2


@dataclass(frozen=True)
class RunContext:
    config: SuiteConfig
    store: InstanceStore

    def ceiling(self, check_id: str, k: int) -> float:
        return self.config.ceilings.ceiling(check_id, k)

    @property
    def tol(self) -> float:
        return self.config.tolerances.exact

    @property
    def epsilon_floor(self) -> float:
        return self.config.tolerances.epsilon_floor


@dataclass(frozen=True, eq=False)
class Prepared:
    mu: WeightedComplex
    f: Fn
    epsilon: float


def _prepare(ctx: RunContext, case: Case, *, certify: bool = True) -> Prepared:
    mu = ctx.store.complex_for(case.spec)
    f = ctx.store.function_for(case, mu)
    epsilon = ctx.store.epsilon_for(case.spec, mu) if certify else 0.0
    return Prepared(mu, f, epsilon)


def _small(k: int) -> List[int]:
    return subsets.by_size(k, min(k, PAIR_MAX_SIZE))


def _ordered_pairs(k: int) -> Iterator[Tuple[int, int]]:
    return itertools.product(_small(k), repeat=2)


def _derivative_subsets(k: int, d: int) -> List[int]:
    return [t for t in subsets.by_size(k, min(d, k - 1)) if t]


# --- exact identities ---------------------------------------------------------


def run_reconstruction(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case, certify=False)
    family = es_all(p.mu, p.f)
    return [
        identity_record("C1-reconstruction", "sum-of-components", family.reconstruct().values, p.f.values, tol=ctx.tol)
    ]


def run_laplacian_equivalence(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case, certify=False)
    family = es_all(p.mu, p.f)
    return [
        identity_record(
            "C2-laplacian-equivalence",
            "alternating-vs-components",
            laplacian(p.mu, p.f, s).values,
            laplacian_via_components(p.mu, p.f, s, family).values,
            tol=ctx.tol,
            detail={"S": subsets.fmt(s)},
        )
        for s in range(1 << p.mu.k)
    ]


def run_noise_equivalence(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case, certify=False)
    family = es_all(p.mu, p.f)
    return [
        identity_record(
            "C3-noise-equivalence",
            "direct-vs-spectral",
            noise_direct(p.mu, p.f, rho).values,
            noise_spectral(p.mu, p.f, rho, family).values,
            tol=ctx.tol,
            detail={"rho": rho},
        )
        for rho in ctx.config.grids.rhos
    ]


def run_updown_equivalence(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case, certify=False)
    return [
        identity_record(
            "C4-updown-equivalence",
            "direct-vs-spectral",
            updown(p.mu, p.f).values,
            updown_spectral(p.mu, p.f).values,
            tol=ctx.tol,
        )
    ]


# --- explicit-constant bounds -----------------------------------------------


def run_contraction(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case, certify=False)
    records = []
    for s, t in _ordered_pairs(p.mu.k):
        records.extend(check_contraction(p.mu, p.f, s, t))
    records.extend(check_component_norm(p.mu, p.f, s) for s in range(1 << p.mu.k))
    return records


def run_disjoint_avg(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    return [
        check_disjoint_avg(p.mu, p.f, s, t, p.epsilon)
        for s, t in _ordered_pairs(p.mu.k)
        if s and t and not s & t
    ]


def run_composition(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    records = []
    for first, second in _ordered_pairs(p.mu.k):
        records.append(check_composition(p.mu, p.f, first, second, p.epsilon))
        if first:
            records.append(check_intersection_avg(p.mu, p.f, first, second, p.epsilon))
    return records


def run_near_orthogonality(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    g = ctx.store.partner_for(case, p.mu)
    return [
        check_near_orthogonality(p.mu, p.f, g, s, t, p.epsilon)
        for s, t in _ordered_pairs(p.mu.k)
        if s != t
    ]


def run_parseval(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    g = ctx.store.partner_for(case, p.mu)
    records = [check_parseval(p.mu, p.f, g, p.epsilon)]
    for t in _small(p.mu.k):
        if t and t != p.mu.full:
            records.append(check_parseval(p.mu, average_to(p.mu, p.f, t), g, p.epsilon, junta=t))
    return records


def run_idempotence(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    return [check_idempotence(p.mu, p.f, s, t, p.epsilon) for s, t in _ordered_pairs(p.mu.k) if s]


def run_junta_orthogonality(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    g = ctx.store.partner_for(case, p.mu)
    records = []
    for s, t in _ordered_pairs(p.mu.k):
        if t and not subsets.is_subset(s, t):
            records.append(check_junta_orthogonality(p.mu, p.f, avg(p.mu, g, t), s, p.epsilon))
    return records


def run_strong_parseval(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    g = ctx.store.partner_for(case, p.mu)
    wf = exact_witness(es_all(p.mu, p.f), p.f)
    wg = exact_witness(es_all(p.mu, g), g)
    zeta = ctx.config.grids.perturbation_zeta
    seed = case.function.seed
    return [
        check_strong_parseval(p.mu, p.f, g, wf, wg, p.epsilon, variant="strong"),
        check_strong_parseval(
            p.mu,
            p.f,
            g,
            perturb_family(wf, zeta, seed),
            perturb_family(wg, zeta, seed + 1),
            p.epsilon,
            variant="perturbed",
        ),
    ]


# --- globalness -------------------------------------------------------------


def run_global_component(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    d = min(case.d, p.mu.k)
    delta = globalness(p.mu, p.f, d).delta_min
    return check_global_components(p.mu, p.f, d, delta)


def run_influence_bounds(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    d = min(case.d, p.mu.k)
    delta = globalness(p.mu, p.f, d).delta_min
    return check_influence_bounds(
        p.mu,
        p.f,
        d,
        delta,
        p.epsilon,
        ceiling=ctx.ceiling("C14-influence-bounds", p.mu.k),
        epsilon_floor=ctx.epsilon_floor,
    )


# --- hypercontractivity -------------------------------------------------------


def run_product_hypercontractivity(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    return check_product_hypercontractivity(
        p.mu,
        p.f,
        min(case.d, p.mu.k),
        p.epsilon,
        ceiling=ctx.ceiling("C15-product-hypercontractivity", p.mu.k),
        epsilon_floor=ctx.epsilon_floor,
    )


def run_hdx_hypercontractivity(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    d = min(case.d, p.mu.k)
    delta = globalness(p.mu, p.f, d).delta_min
    return check_hdx_hypercontractivity(
        p.mu,
        p.f,
        d,
        delta,
        p.epsilon,
        ceiling=ctx.ceiling("C16-hdx-hypercontractivity", p.mu.k),
        epsilon_floor=ctx.epsilon_floor,
    )


# --- applications -------------------------------------------------------------


def run_fourier_concentration(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    delta = globalness(p.mu, p.f, case.d).delta_min
    return [
        check_fourier_concentration(
            p.mu,
            p.f,
            case.d,
            delta,
            p.epsilon,
            ceiling=ctx.ceiling("C17-fourier-concentration", p.mu.k),
            epsilon_floor=ctx.epsilon_floor,
        )
    ]


def run_sse(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    rhos = ctx.config.grids.rhos
    if case.role == "control":
        return [sse_negative_control(p.mu, p.f, rho, case.d) for rho in rhos]
    d = min(case.d, p.mu.k)
    records = [noise_lemma_check(p.mu, p.f, rho, d, p.epsilon) for rho in rhos]
    if case.role == "global-set":
        delta = globalness(p.mu, p.f, d).delta_min
        records.extend(
            check_sse(
                p.mu,
                p.f,
                rho,
                d,
                delta,
                p.epsilon,
                ceiling=ctx.ceiling("C18-sse", p.mu.k),
                epsilon_floor=ctx.epsilon_floor,
            )
            for rho in rhos
        )
    return records


def run_kruskal_katona(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    delta = globalness(p.mu, p.f, case.d).delta_min
    return check_kk(
        p.mu,
        p.f,
        case.d,
        delta,
        p.epsilon,
        ceiling=ctx.ceiling("C19-kruskal-katona", p.mu.k),
        epsilon_floor=ctx.epsilon_floor,
        strict=False,
        threads=ctx.config.runtime.threads,
    )


# --- approximate decompositions ---------------------------------------------------


def run_l4_closeness(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    ceiling = ctx.ceiling("C20-l4-closeness", p.mu.k)
    d = min(case.d, p.mu.k)
    records = []
    for t in _derivative_subsets(p.mu.k, d):
        lap = laplacian(p.mu, p.f, t)
        natural = natural_laplacian_family(p.mu, p.f, t)
        derived = derivative_es_family(p.mu, p.f, t)
        records.extend(check_l4_closeness(p.mu, lap, natural, derived, t, p.epsilon, ceiling=ceiling))

    delta = globalness(p.mu, p.f, d).delta_min
    witness = low_degree_family(p.mu, p.f, d)
    params = validate_approx_es(p.mu, low_degree(es_all(p.mu, p.f), d), witness)
    records.append(
        report_record(
            "C20-l4-closeness",
            "low-degree-beta",
            params.beta,
            float(p.mu.k) ** d * delta,
            ceiling=ceiling,
            detail={"d": d, "delta": f"{delta:.6g}"},
        )
    )
    return records


def run_derivative_family(ctx: RunContext, case: Case) -> List[CheckRecord]:
    p = _prepare(ctx, case)
    ceiling = ctx.ceiling("C21-derivative-family", p.mu.k)
    family = es_all(p.mu, p.f)
    records = []
    for t in _derivative_subsets(p.mu.k, min(case.d, p.mu.k)):
        records.extend(
            check_derivative_family(
                p.mu, p.f, t, p.epsilon, ceiling=ceiling, epsilon_floor=ctx.epsilon_floor, family=family
            )
        )
    return records


Runner = Callable[[RunContext, Case], List[CheckRecord]]


@dataclass(frozen=True)
class CatalogEntry:
    check_id: str
    title: str
    anchors: Tuple[str, ...]
    runner: Runner

    def manifest(self) -> Dict[str, object]:
        return {"check_id": self.check_id, "title": self.title, "anchors": list(self.anchors)}


CATALOG: Tuple[CatalogEntry, ...] = (
    CatalogEntry(
        "C1-reconstruction",
        "Reconstruction from Efron-Stein components",
        ("f = sum over S of f^{=S}",),
        run_reconstruction,
    ),
    CatalogEntry(
        "C2-laplacian-equivalence",
        "Laplacian: component sum vs alternating averages",
        ("L_S[f] = sum over T >= S of f^{=T} = sum over T <= S of (-1)^|T| A_{[k]-T} f",),
        run_laplacian_equivalence,
    ),
    CatalogEntry(
        "C3-noise-equivalence",
        "Noise operator: averaging form vs spectral form",
        ("T_rho f = sum over S of rho^|S| f^{=S}",),
        run_noise_equivalence,
    ),
    CatalogEntry(
        "C4-updown-equivalence",
        "Up-down walk: averaging form vs spectral form",
        ("T f = (1/k) sum_i A_{[k]-i} f = sum over S of ((k-|S|)/k) f^{=S}",),
        run_updown_equivalence,
    ),
    CatalogEntry(
        "C5-contraction",
        "Averaging contracts; components are bounded",
        ("||A_{S,T}||_{2->2} <= 1", "||f^{=S}||_2 <= 2^|S| ||f||_2"),
        run_contraction,
    ),
    CatalogEntry(
        "C6-disjoint-avg",
        "Averaging between disjoint coordinate sets",
        ("||A_{S,T} f - E f||_2^2 <= |S||T| eps^2 ||f||_2^2",),
        run_disjoint_avg,
    ),
    CatalogEntry(
        "C7-composition",
        "Composition of averaging operators",
        (
            "||A_{T2} A_{T1} - A_{T1 & T2}||_{2->2} <= |T1||T2| eps",
            "||A_{S,T} f - A_{S,S&T} f||_2^2 <= |S||T| eps^2 ||f||_2^2",
        ),
        run_composition,
    ),
    CatalogEntry(
        "C8-near-orthogonality",
        "Near-orthogonality of distinct components",
        ("<f^{=S}, g^{=T}> <= 2^{2|S|+2|T|} eps ||f||_2 ||g||_2",),
        run_near_orthogonality,
    ),
    CatalogEntry(
        "C9-approx-parseval",
        "Approximate Parseval",
        (
            "|<f,g> - sum_S <f^{=S},g^{=S}>| <= 2^{4k} eps ||f||_2 ||g||_2",
            "for a T-junta f the sum runs over S <= T with 2^{4|T|}",
        ),
        run_parseval,
    ),
    CatalogEntry(
        "C10-idempotence",
        "Approximate idempotence of the decomposition",
        ("||g^{=S} - g||_2^2 <= 2^{10k} eps^2 ||f||_2^2", "||g^{=T}||_2^2 <= 2^{8k} eps^2 ||f||_2^2 for T != S"),
        run_idempotence,
    ),
    CatalogEntry(
        "C11-junta-orthogonality",
        "Components are nearly orthogonal to juntas not containing them",
        ("<f^{=S}, g> <= eps sqrt(|S||T|) 2^|S| ||f||_2 ||g||_2 for T-juntas g",),
        run_junta_orthogonality,
    ),
    CatalogEntry(
        "C12-strong-parseval",
        "Parseval for approximate decompositions",
        ("|<f,g> - sum_S <f_S,g_S>| <= 2^{6k}(eps1 alpha2 + eps2 alpha1 + eps alpha1 alpha2)",),
        run_strong_parseval,
    ),
    CatalogEntry(
        "C13-global-component",
        "Components of global functions are bounded",
        ("||f^{=T}||_inf <= 2^|T| delta",),
        run_global_component,
    ),
    CatalogEntry(
        "C14-influence-bounds",
        "Globalness implies small influences",
        (
            "E I_{T,x}^2 <= 2^{d+1} delta^2 E I_{T,x} + O_k(eps^2 ||f||_4^4)",
            "E I^{<=d}_{T,x}^2 <= 2^{d+4} delta^2 E I^{<=d}_{T,x} + O_k(eps^2 ||f||_inf^2 ||f||_2^2)",
        ),
        run_influence_bounds,
    ),
    CatalogEntry(
        "C15-product-hypercontractivity",
        "Hypercontractivity on product spaces",
        (
            "sum_S E_x I_{S,x}[f^{<=d}] <= 2^d ||f||_2^2",
            "||f||_4^4 <= 2 9^d sum_{|T|<=d} (9d)^|T| E I_{T,x}^2",
            "||f^{<=d}||_4^4 <= delta 2000^d ||f||_2^2",
            "1/2 ||f||_4^4 <= 9^d ||f||_2^4 + sum_{T != {}} (4d)^|T| ||L_T f||_4^4",
            "||f||_4 <= sqrt(3)^d ||f||_2 on the uniform cube",
        ),
        run_product_hypercontractivity,
    ),
    CatalogEntry(
        "C16-hdx-hypercontractivity",
        "Hypercontractivity on epsilon-product spaces",
        (
            "1/2 ||f^{<=d}||_4^4 <= 9^d ||f^{<=d}||_2^4 + 4 sum (4d)^|T| ||L_T^{<=d} f||_4^4 + O(eps)",
            "||f^{<=d}||_4^4 <= 20^d sum_{|S|<=d} (4d)^|S| E I^{<=d}_{S,x}^2 + O(eps)",
            "global version with 20^{d+1}",
            "||f^{<=d}||_4^4 <= (100d)^d delta^2 ||f^{<=d}||_2^2 + O(eps^2 delta^2 ||f||_2^2)",
        ),
        run_hdx_hypercontractivity,
    ),
    CatalogEntry(
        "C17-fourier-concentration",
        "Global Boolean functions have little low-degree weight",
        ("||f^{<=d}||_2^2 <= ((200d)^d delta^{1/2} + O_k(sqrt eps)) ||f||_2^2",),
        run_fourier_concentration,
    ),
    CatalogEntry(
        "C18-sse",
        "Small-set expansion of the noise operator",
        (
            "||T_rho f||_2^2 <= ||f^{<=d}||_2^2 + (rho^d + O_k(eps)) ||f||_2^2",
            "||T_rho f||_2^2 <= (rho^d + (100d)^d delta^2 + O_k(sqrt eps)) ||f||_2^2",
            "a dictator violates the global conclusion",
        ),
        run_sse,
    ),
    CatalogEntry(
        "C19-kruskal-katona",
        "Shadows of global sets",
        (
            "mu(dA) >= mu(A)(1 + d/(2k)) for delta <= (200d)^{-d}",
            "<f - Tf, f> <= mu(dA) - mu(A)",
        ),
        run_kruskal_katona,
    ),
    CatalogEntry(
        "C20-l4-closeness",
        "L4 closeness of different Efron-Stein decompositions",
        ("||f_S - f'_S||_2^2 <= O_k(eps')^2 + O_k(eps alpha^2) and the three L4 companions",),
        run_l4_closeness,
    ),
    CatalogEntry(
        "C21-derivative-family",
        "Derivatives give a bounded approximate decomposition of the Laplacian",
        ("f_S(x,y) = D_{T,x}^{=S-T}[f](y) decomposes L_T[f] with parameters (C||f||_inf, C||f||_2, C eps ||f||_2)",),
        run_derivative_family,
    ),
)

CATALOG_BY_ID: Dict[str, CatalogEntry] = {entry.check_id: entry for entry in CATALOG}


def catalog_manifest() -> List[Dict[str, object]]:
    return [entry.manifest() for entry in CATALOG]


__all__ = [
    "PAIR_MAX_SIZE",
    "RunContext",
    "Prepared",
    "CatalogEntry",
    "CATALOG",
    "CATALOG_BY_ID",
    "catalog_manifest",
]
