"""Fourth-moment (hypercontractive) inequalities for low-degree functions.

Each ``*_bound`` function returns a :class:`MomentBound`: the measured left
side, the explicit right side and the scale of the unknown ``O_k`` term.  The
``check_*`` functions turn them into records: product-space inequalities are
asserted when the certified epsilon is zero, and every inequality that carries
an ``O_k`` error term is reported as a residual ratio otherwise.
"""
from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np

from . import subsets
from .calculus import influence_profile, influence_sum, laplacian, laplacian_trunc, max_influence, require_global
from .decomposition import EfronSteinFamily, es_all, low_degree
from .errors import InvalidParameter
from .measure_space import Fn, WeightedComplex, norm2, norm_p
from .records import EPSILON_FLOOR, CheckRecord, residual_record

logger = logging.getLogger(__name__)


class MomentBound(NamedTuple):
    lhs: float
    rhs: float
    scale: float


def _degree_part(mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None) -> tuple[Fn, EfronSteinFamily]:
    if d < 0 or d > mu.k:
        raise InvalidParameter(f"degree d={d} outside [0, {mu.k}]")
    family = family or es_all(mu, f)
    return low_degree(family, d), family


def _weighted_influence_moments(
    mu: WeightedComplex,
    f: Fn,
    d: int,
    base: float,
    family: EfronSteinFamily,
    *,
    truncated: bool,
) -> float:
    """``sum_{|S| <= d} base^{|S|} E_x I_{S,x}^2`` (truncated influences when asked)."""
    terms = []
    for s in subsets.all_subsets(mu.k, d):
        profile = influence_profile(mu, f, s, d, family)
        moment = profile.mean_sq_trunc if truncated else profile.mean_sq
        terms.append(base ** subsets.size(s) * moment)
    return math.fsum(terms)


def _eps_scale(f: Fn) -> float:
    return norm2(f) ** 2 * norm_p(f, math.inf) ** 2


def influence_sum_bound(mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None = None) -> MomentBound:
    """``sum_S E_x I_{S,x}[f^{<=d}] <= 2^d ||f||^2``."""
    g, _ = _degree_part(mu, f, d, family)
    return MomentBound(influence_sum(mu, g), 2.0**d * norm2(f) ** 2, _eps_scale(f))


def product_hypercontractivity_bound(
    mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None = None
) -> MomentBound:
    """``||g||_4^4 <= 2 * 9^d sum_{|T| <= d} (9d)^{|T|} E_x I_{T,x}[g]^2`` for ``g = f^{<=d}``."""
    g, _ = _degree_part(mu, f, d, family)
    rhs = 2.0 * 9.0**d * _weighted_influence_moments(mu, g, d, 9.0 * d, es_all(mu, g), truncated=False)
    return MomentBound(norm_p(g, 4.0) ** 4, rhs, _eps_scale(f))


def influence_global_bound(mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None = None) -> MomentBound:
    """``||g||_4^4 <= delta_I 2000^d ||g||^2`` where ``delta_I`` bounds every influence of ``g = f^{<=d}``."""
    g, _ = _degree_part(mu, f, d, family)
    delta_i = max_influence(mu, g, d)
    return MomentBound(norm_p(g, 4.0) ** 4, delta_i * 2000.0**d * norm2(g) ** 2, _eps_scale(f))


def inductive_laplacian_bound(mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None = None) -> MomentBound:
    """``1/2 ||g||_4^4 <= 9^d ||g||^4 + sum_{T != {}} (4d)^{|T|} ||L_T g||_4^4``."""
    g, _ = _degree_part(mu, f, d, family)
    tail = math.fsum(
        (4.0 * d) ** subsets.size(t) * norm_p(laplacian(mu, g, t), 4.0) ** 4 for t in range(1, 1 << mu.k)
    )
    return MomentBound(0.5 * norm_p(g, 4.0) ** 4, 9.0**d * norm2(g) ** 4 + tail, _eps_scale(f))


def is_uniform_cube(mu: WeightedComplex) -> bool:
    if any(n != 2 for n in mu.universe.sizes) or mu.n_faces != 1 << mu.k:
        return False
    return bool(np.allclose(mu.weights, 1.0 / mu.n_faces, rtol=0.0, atol=1e-12))


def bonami_bound(mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None = None) -> MomentBound:
    """``||g||_4 <= sqrt(3)^d ||g||_2`` on the uniform cube ``{0,1}^k``."""
    if not is_uniform_cube(mu):
        raise InvalidParameter("the Bonami bound is only checked on the uniform cube")
    g, _ = _degree_part(mu, f, d, family)
    return MomentBound(norm_p(g, 4.0), math.sqrt(3.0) ** d * norm2(g), norm2(f))


def laplacian_moment_bound(mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None = None) -> MomentBound:
    """``1/2 ||f^{<=d}||_4^4 <= 9^d ||f^{<=d}||^4 + 4 sum_{0<|T|<=d} (4d)^{|T|} ||L_T^{<=d} f||_4^4``."""
    g, family = _degree_part(mu, f, d, family)
    tail = math.fsum(
        (4.0 * d) ** subsets.size(t) * norm_p(laplacian_trunc(mu, f, t, d, family), 4.0) ** 4
        for t in subsets.all_subsets(mu.k, d)
        if t
    )
    return MomentBound(0.5 * norm_p(g, 4.0) ** 4, 9.0**d * norm2(g) ** 4 + 4.0 * tail, _eps_scale(f))


def main_hypercontractivity_bound(
    mu: WeightedComplex, f: Fn, d: int, family: EfronSteinFamily | None = None, *, extra_power: int = 0
) -> MomentBound:
    """``||f^{<=d}||_4^4 <= 20^{d + extra} sum_{|S|<=d} (4d)^{|S|} E_x I^{<=d}_{S,x}[f]^2``."""
    g, family = _degree_part(mu, f, d, family)
    moments = _weighted_influence_moments(mu, f, d, 4.0 * d, family, truncated=True)
    return MomentBound(norm_p(g, 4.0) ** 4, 20.0 ** (d + extra_power) * moments, _eps_scale(f))


def global_hypercontractivity_bound(
    mu: WeightedComplex, f: Fn, d: int, delta: float, family: EfronSteinFamily | None = None
) -> MomentBound:
    """``||f^{<=d}||_4^4 <= (100d)^d delta^2 ||f^{<=d}||^2``; the error scale is ``delta^2 ||f||^2``."""
    g, _ = _degree_part(mu, f, d, family)
    rhs = (100.0 * d) ** d * delta**2 * norm2(g) ** 2
    return MomentBound(norm_p(g, 4.0) ** 4, rhs, delta**2 * norm2(f) ** 2)


def check_product_hypercontractivity(
    mu: WeightedComplex,
    f: Fn,
    d: int,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    check_id: str = "C15-product-hypercontractivity",
) -> list[CheckRecord]:
    family = es_all(mu, f)
    bounds = {
        "influence-sum": influence_sum_bound(mu, f, d, family),
        "fourth-moment": product_hypercontractivity_bound(mu, f, d, family),
        "influence-global": influence_global_bound(mu, f, d, family),
        "inductive": inductive_laplacian_bound(mu, f, d, family),
    }
    if is_uniform_cube(mu):
        bounds["bonami"] = bonami_bound(mu, f, d, family)
    return [
        residual_record(
            check_id,
            variant,
            b.lhs,
            b.rhs,
            epsilon * b.scale,
            epsilon,
            ceiling=ceiling,
            epsilon_floor=epsilon_floor,
            detail={"d": d},
        )
        for variant, b in bounds.items()
    ]


def check_hdx_hypercontractivity(
    mu: WeightedComplex,
    f: Fn,
    d: int,
    delta: float,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    check_id: str = "C16-hdx-hypercontractivity",
) -> list[CheckRecord]:
    """Laplacian, main, global and (100d)^d inequalities for a (d, delta)-global ``f``."""
    require_global(mu, f, d, delta)
    family = es_all(mu, f)
    detail = {"d": d, "delta": f"{delta:.6g}"}
    records = []

    def add(variant: str, bound: MomentBound, scale: float) -> None:
        records.append(
            residual_record(
                check_id,
                variant,
                bound.lhs,
                bound.rhs,
                scale,
                epsilon,
                ceiling=ceiling,
                epsilon_floor=epsilon_floor,
                detail=detail,
            )
        )

    laplacians = laplacian_moment_bound(mu, f, d, family)
    add("laplacian-moments", laplacians, epsilon * laplacians.scale)
    main = main_hypercontractivity_bound(mu, f, d, family)
    add("main", main, epsilon * main.scale)
    with_delta = main_hypercontractivity_bound(mu, f, d, family, extra_power=1)
    add("main-global", with_delta, epsilon**2 * delta**2 * norm2(f) ** 2)
    global_bound = global_hypercontractivity_bound(mu, f, d, delta, family)
    add("global", global_bound, epsilon**2 * global_bound.scale)
    return records


__all__ = [
    "MomentBound",
    "influence_sum_bound",
    "product_hypercontractivity_bound",
    "influence_global_bound",
    "inductive_laplacian_bound",
    "is_uniform_cube",
    "bonami_bound",
    "laplacian_moment_bound",
    "main_hypercontractivity_bound",
    "global_hypercontractivity_bound",
    "check_product_hypercontractivity",
    "check_hdx_hypercontractivity",
]
