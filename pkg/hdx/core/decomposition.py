"""Efron-Stein components and (approximate) decomposition checks.

``f^{=S} = sum_{T <= S} (-1)^{|S \\ T|} A_T f`` is evaluated from a memo of the
averages ``A_T f`` over all ``T``, so one decomposition costs ``2^k``
averaging passes.  Components are stored junta-reduced (home ``S``).
"""
from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import subsets
from .errors import DomainMismatch, InvalidParameter, MissingWitness
from .measure_space import Fn, WeightedComplex, inner, lift, norm2, norm_p
from .operators import avg
from .records import CheckRecord, bound_record, report_record

logger = logging.getLogger(__name__)


def averages(mu: WeightedComplex, f: Fn, within: int | None = None) -> dict[int, Fn]:
    """``A_T f`` (home ``T``) for every ``T`` inside ``within`` (default ``[k]``)."""
    within = mu.full if within is None else within
    return {t: avg(mu, f, t) for t in subsets.subsets_of(within)}


def es_component(
    mu: WeightedComplex,
    f: Fn,
    subset: int,
    memo: Mapping[int, Fn] | None = None,
) -> Fn:
    """``f^{=S}`` with home ``S``."""
    if not f.complex.same_as(mu):
        raise DomainMismatch(f"function lives on complex {f.complex.complex_id}, not {mu.complex_id}")
    subsets.validate(subset, mu.k)
    total = np.zeros(mu.support_size(subset))
    for t in subsets.subsets_of(subset):
        a_t = memo[t] if memo is not None else avg(mu, f, t)
        sign = -1.0 if subsets.size(subset & ~t) % 2 else 1.0
        total += sign * lift(a_t, to=subset).values
    return Fn(mu, subset, total)


@dataclass(frozen=True, eq=False)
class EfronSteinFamily:
    """Components ``S -> f_S`` with home ``S`` (all ``2^k`` of them, or a declared subset)."""

    complex: WeightedComplex
    components: Mapping[int, Fn] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ordered = dict(sorted(self.components.items()))
        for s, comp in ordered.items():
            if comp.home != s:
                raise DomainMismatch(f"component {subsets.fmt(s)} has home {subsets.fmt(comp.home)}")
            if not comp.complex.same_as(self.complex):
                raise DomainMismatch(f"component {subsets.fmt(s)} lives on another complex")
        object.__setattr__(self, "components", ordered)

    @property
    def complete(self) -> bool:
        return len(self.components) == 1 << self.complex.k

    def __getitem__(self, subset: int) -> Fn:
        return self.components[subset]

    def __contains__(self, subset: int) -> bool:
        return subset in self.components

    def get(self, subset: int) -> Fn:
        comp = self.components.get(subset)
        return comp if comp is not None else Fn.zeros(self.complex, subset)

    def total(self, predicate=None) -> Fn:
        """``sum lift(f_S)`` over the components selected by ``predicate(S)``."""
        acc = np.zeros(self.complex.n_faces)
        for s, comp in self.components.items():
            if predicate is None or predicate(s):
                acc += lift(comp).values
        return Fn(self.complex, self.complex.full, acc)

    def reconstruct(self) -> Fn:
        return self.total()

    def select(self, predicate) -> "EfronSteinFamily":
        return EfronSteinFamily(self.complex, {s: c for s, c in self.components.items() if predicate(s)})


def es_all(mu: WeightedComplex, f: Fn, *, threads: int = 1) -> EfronSteinFamily:
    """All ``2^k`` components, sharing one memo of averages."""
    memo = averages(mu, f)
    masks = list(range(1 << mu.k))
    if threads > 1 and len(masks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            comps = list(pool.map(lambda s: es_component(mu, f, s, memo), masks))
    else:
        comps = [es_component(mu, f, s, memo) for s in masks]
    return EfronSteinFamily(mu, dict(zip(masks, comps)))


def low_degree(family: EfronSteinFamily, d: int) -> Fn:
    """``f^{<=d} = sum_{|S| <= d} f^{=S}`` lifted to ``[k]``."""
    return family.total(lambda s: subsets.size(s) <= d)


def high_degree(family: EfronSteinFamily, d: int) -> Fn:
    """Degree >= d tail ``sum_{|S| >= d} f^{=S}`` on ``[k]``: the weight the walk-gap and shadow bounds measure."""
    return family.total(lambda s: subsets.size(s) >= d)


def parseval_defect(mu: WeightedComplex, f: Fn, g: Fn) -> float:
    ff, gg = es_all(mu, f), es_all(mu, g)
    diagonal = math.fsum(inner(ff[s], gg[s]) for s in ff.components)
    return abs(inner(f, g) - diagonal)


def parseval_junta_defect(mu: WeightedComplex, f: Fn, g: Fn, junta: int) -> float:
    """Parseval restricted to ``S <= T`` when ``f`` depends only on ``x_T``."""
    ff, gg = es_all(mu, f), es_all(mu, g)
    diagonal = math.fsum(inner(ff[s], gg[s]) for s in subsets.subsets_of(junta))
    return abs(inner(f, g) - diagonal)


def check_parseval(
    mu: WeightedComplex,
    f: Fn,
    g: Fn,
    epsilon: float,
    *,
    junta: int | None = None,
    check_id: str = "C9-approx-parseval",
) -> CheckRecord:
    nf, ng = norm2(f), norm2(g)
    if junta is None:
        lhs = parseval_defect(mu, f, g)
        return bound_record(check_id, "parseval", lhs, 2.0 ** (4 * mu.k) * epsilon * nf * ng)
    lhs = parseval_junta_defect(mu, f, g, junta)
    rhs = 2.0 ** (4 * subsets.size(junta)) * epsilon * nf * ng
    return bound_record(check_id, "parseval-junta", lhs, rhs, detail={"T": subsets.fmt(junta)})


def near_orthogonality_defect(mu: WeightedComplex, f: Fn, g: Fn, s: int, t: int) -> float:
    """``|<f^{=S}, g^{=T}>|`` after lifting both components to ``[k]``."""
    return abs(inner(lift(es_component(mu, f, s)), lift(es_component(mu, g, t))))


def check_near_orthogonality(
    mu: WeightedComplex,
    f: Fn,
    g: Fn,
    s: int,
    t: int,
    epsilon: float,
    *,
    check_id: str = "C8-near-orthogonality",
) -> CheckRecord:
    if s == t:
        raise InvalidParameter("near-orthogonality needs S != T")
    lhs = near_orthogonality_defect(mu, f, g, s, t)
    rhs = 2.0 ** (2 * subsets.size(s) + 2 * subsets.size(t)) * epsilon * norm2(f) * norm2(g)
    return bound_record(check_id, "components", lhs, rhs, detail={"S": subsets.fmt(s), "T": subsets.fmt(t)})


def junta_orthogonality_defect(mu: WeightedComplex, f: Fn, junta_fn: Fn, s: int) -> float:
    """``|<f^{=S}, g>|`` for a ``T``-junta ``g`` given with home ``T``."""
    return abs(inner(lift(es_component(mu, f, s)), lift(junta_fn)))


def check_junta_orthogonality(
    mu: WeightedComplex,
    f: Fn,
    junta_fn: Fn,
    s: int,
    epsilon: float,
    *,
    check_id: str = "C11-junta-orthogonality",
) -> CheckRecord:
    t = junta_fn.home
    if subsets.is_subset(s, t):
        raise InvalidParameter(f"{subsets.fmt(t)} contains {subsets.fmt(s)}")
    lhs = junta_orthogonality_defect(mu, f, junta_fn, s)
    rhs = (
        epsilon
        * math.sqrt(subsets.size(s) * subsets.size(t))
        * 2.0 ** subsets.size(s)
        * norm2(f)
        * norm2(junta_fn)
    )
    return bound_record(check_id, "junta", lhs, rhs, detail={"S": subsets.fmt(s), "T": subsets.fmt(t)})


def idempotence_defect(mu: WeightedComplex, f: Fn, s: int, t: int) -> float:
    """``||(f^{=S})^{=T}||`` for ``T != S``, else ``||(f^{=S})^{=S} - f^{=S}||``."""
    g = es_component(mu, f, s)
    again = es_component(mu, lift(g), t)
    if t == s:
        return norm2(again - g)
    return norm2(again)


def check_idempotence(
    mu: WeightedComplex,
    f: Fn,
    s: int,
    t: int,
    epsilon: float,
    *,
    check_id: str = "C10-idempotence",
) -> CheckRecord:
    lhs = idempotence_defect(mu, f, s, t) ** 2
    power = 10 if s == t else 8
    rhs = 2.0 ** (power * mu.k) * epsilon**2 * norm2(f) ** 2
    variant = "same" if s == t else "other"
    return bound_record(check_id, variant, lhs, rhs, detail={"S": subsets.fmt(s), "T": subsets.fmt(t)})


def check_component_norm(
    mu: WeightedComplex, f: Fn, s: int, *, check_id: str = "C5-contraction"
) -> CheckRecord:
    """``||f^{=S}|| <= 2^{|S|} ||f||``."""
    lhs = norm2(es_component(mu, f, s))
    return bound_record(
        check_id, "component", lhs, 2.0 ** subsets.size(s) * norm2(f), detail={"S": subsets.fmt(s)}
    )


class ApproxParameters(NamedTuple):
    alpha: float
    eps_prime: float
    beta: float


@dataclass(frozen=True, eq=False)
class ApproxESWitness:
    """Candidate family ``{f_S}`` with witnesses ``h_S`` (home ``[k]``)."""

    family: EfronSteinFamily
    witnesses: Mapping[int, Fn] = field(default_factory=dict)
    alpha: float | None = None
    eps_prime: float | None = None
    beta: float | None = None

    def declared(self) -> ApproxParameters | None:
        if self.alpha is None or self.eps_prime is None:
            return None
        return ApproxParameters(self.alpha, self.eps_prime, math.inf if self.beta is None else self.beta)


def exact_witness(family: EfronSteinFamily, source: Fn) -> ApproxESWitness:
    """Every component witnessed by the function it was cut from."""
    return ApproxESWitness(family, {s: source for s in family.components})


def validate_approx_es(mu: WeightedComplex, f: Fn, witness: ApproxESWitness) -> ApproxParameters:
    """Tightest ``(alpha, eps', beta)`` for which ``witness`` decomposes ``f``."""
    family = witness.family
    missing = [s for s in family.components if s not in witness.witnesses]
    if missing:
        raise MissingWitness("no h_S for " + ", ".join(subsets.fmt(s) for s in missing))

    memos: dict[int, dict[int, Fn]] = {}
    alpha = norm2(f)
    eps_prime = norm2(f - family.reconstruct()) if family.components else norm2(f)
    beta = norm_p(f, math.inf)
    for s, comp in family.components.items():
        h = witness.witnesses[s]
        if h.home != mu.full:
            raise DomainMismatch(f"witness for {subsets.fmt(s)} must have home [k]")
        memo = memos.setdefault(id(h), averages(mu, h))
        h_s = es_component(mu, h, s, memo)
        alpha = max(alpha, norm2(h))
        eps_prime = max(eps_prime, norm2(h_s - comp))
        beta = max(beta, norm_p(h_s, math.inf), norm_p(comp, math.inf))
    return ApproxParameters(alpha, eps_prime, beta)


def witness_accepts(
    witness: ApproxESWitness, computed: ApproxParameters, *, slack: float = 1e-9
) -> bool:
    declared = witness.declared()
    if declared is None:
        return False
    return all(d + slack * max(1.0, abs(c)) >= c for d, c in zip(declared, computed))


def with_parameters(witness: ApproxESWitness, params: ApproxParameters) -> ApproxESWitness:
    return ApproxESWitness(witness.family, witness.witnesses, params.alpha, params.eps_prime, params.beta)


def strong_parseval_defect(
    mu: WeightedComplex, f: Fn, g: Fn, wf: ApproxESWitness, wg: ApproxESWitness
) -> float:
    shared = [s for s in wf.family.components if s in wg.family.components]
    diagonal = math.fsum(inner(wf.family[s], wg.family[s]) for s in shared)
    return abs(inner(f, g) - diagonal)


def check_strong_parseval(
    mu: WeightedComplex,
    f: Fn,
    g: Fn,
    wf: ApproxESWitness,
    wg: ApproxESWitness,
    epsilon: float,
    *,
    variant: str = "strong",
    check_id: str = "C12-strong-parseval",
) -> CheckRecord:
    pf = validate_approx_es(mu, f, wf)
    pg = validate_approx_es(mu, g, wg)
    lhs = strong_parseval_defect(mu, f, g, wf, wg)
    rhs = 2.0 ** (6 * mu.k) * (
        pf.eps_prime * pg.alpha + pg.eps_prime * pf.alpha + epsilon * pf.alpha * pg.alpha
    )
    return bound_record(
        check_id,
        variant,
        lhs,
        rhs,
        detail={"eps1": f"{pf.eps_prime:.3e}", "eps2": f"{pg.eps_prime:.3e}"},
    )


@dataclass(frozen=True)
class L4Closeness:
    """Measured sides of the four L4-closeness bounds and their O_k shapes."""

    lhs: tuple[float, float, float, float]
    shapes: tuple[float, float, float, float]
    parameters: ApproxParameters

    @property
    def ratios(self) -> tuple[float, ...]:
        out = []
        for lhs, shape in zip(self.lhs, self.shapes):
            if shape > 0:
                out.append(lhs / shape)
            else:
                out.append(0.0 if lhs <= 1e-12 else math.inf)
        return tuple(out)


def l4_closeness_defect(
    mu: WeightedComplex,
    f: Fn,
    w1: ApproxESWitness,
    w2: ApproxESWitness,
    subset: int,
    epsilon: float,
) -> L4Closeness:
    p1 = validate_approx_es(mu, f, w1)
    p2 = validate_approx_es(mu, f, w2)
    params = ApproxParameters(*(max(a, b) for a, b in zip(p1, p2)))
    alpha, eps_p, beta = params

    gap_s = w1.family.get(subset) - w2.family.get(subset)
    indices = sorted(set(w1.family.components) | set(w2.family.components))
    gap_all = np.zeros(mu.n_faces)
    for s in indices:
        gap_all += lift(w1.family.get(s) - w2.family.get(s)).values
    gap_all_fn = Fn(mu, mu.full, gap_all)
    remainder = f - w1.family.reconstruct()
    nf = norm2(f)

    lhs = (
        norm2(gap_s) ** 2,
        norm_p(gap_s, 4.0) ** 4,
        norm_p(gap_all_fn, 4.0) ** 4,
        norm_p(remainder, 4.0) ** 4,
    )
    shapes = (
        eps_p**2 + epsilon * alpha**2,
        eps_p**2 * beta**2 + epsilon * alpha**2 * beta**2,
        eps_p**2 * beta**2 + epsilon**2 * alpha**2 * beta**2,
        eps_p**2 * beta**2 + epsilon**2 * beta**2 * (alpha**2 + nf**2),
    )
    return L4Closeness(lhs, shapes, params)


def check_l4_closeness(
    mu: WeightedComplex,
    f: Fn,
    w1: ApproxESWitness,
    w2: ApproxESWitness,
    subset: int,
    epsilon: float,
    *,
    ceiling: float,
    check_id: str = "C20-l4-closeness",
) -> list[CheckRecord]:
    result = l4_closeness_defect(mu, f, w1, w2, subset, epsilon)
    detail = {"S": subsets.fmt(subset)}
    return [
        report_record(check_id, f"part{i + 1}", lhs, shape, ceiling=ceiling, detail=detail)
        for i, (lhs, shape) in enumerate(zip(result.lhs, result.shapes))
    ]


def natural_laplacian_family(mu: WeightedComplex, f: Fn, subset: int) -> ApproxESWitness:
    """``{f^{=T}}_{T >= S}`` with ``h_T = f``: an exact decomposition of ``L_S[f]``."""
    family = es_all(mu, f).select(lambda t: subsets.is_subset(subset, t))
    return exact_witness(family, f)


def low_degree_family(mu: WeightedComplex, f: Fn, d: int) -> ApproxESWitness:
    """``{f^{=S}}_{|S| <= d}`` with ``h_S = f``: a decomposition of ``f^{<=d}``."""
    family = es_all(mu, f).select(lambda s: subsets.size(s) <= d)
    return exact_witness(family, f)


__all__ = [
    "averages",
    "es_component",
    "EfronSteinFamily",
    "es_all",
    "low_degree",
    "high_degree",
    "parseval_defect",
    "parseval_junta_defect",
    "check_parseval",
    "near_orthogonality_defect",
    "check_near_orthogonality",
    "junta_orthogonality_defect",
    "check_junta_orthogonality",
    "idempotence_defect",
    "check_idempotence",
    "check_component_norm",
    "ApproxParameters",
    "ApproxESWitness",
    "exact_witness",
    "validate_approx_es",
    "witness_accepts",
    "with_parameters",
    "strong_parseval_defect",
    "check_strong_parseval",
    "L4Closeness",
    "l4_closeness_defect",
    "check_l4_closeness",
    "natural_laplacian_family",
    "low_degree_family",
]
