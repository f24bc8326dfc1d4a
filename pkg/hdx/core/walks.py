"""Noise operator, up-down walk, shadows and the application-level bounds."""
from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import subsets
from .calculus import globalness, require_global
from .decomposition import EfronSteinFamily, es_all, high_degree, low_degree
from .errors import DomainMismatch, HdxError, InvalidParameter, NotBoolean, PreconditionDelta
from .measure_space import Fn, PartialAssignment, WeightedComplex, expectation, inner, lift, norm2
from .operators import average_to
from .records import (
    EPSILON_FLOOR,
    EXACT_TOLERANCE,
    CheckRecord,
    Status,
    bound_record,
    report_record,
    residual_record,
)

logger = logging.getLogger(__name__)


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameter(f"rho={rho} outside [0, 1]")
    return rho


def noise_direct(mu: WeightedComplex, f: Fn, rho: float) -> Fn:
    """``T_rho f = sum_S rho^{|S|} (1 - rho)^{k - |S|} A_S f``."""
    rho = _check_rho(rho)
    total = np.zeros(mu.n_faces)
    for s in range(1 << mu.k):
        weight = rho ** subsets.size(s) * (1.0 - rho) ** (mu.k - subsets.size(s))
        if weight:
            total += weight * average_to(mu, f, s).values
    return Fn(mu, mu.full, total)


def noise_spectral(mu: WeightedComplex, f: Fn, rho: float, family: EfronSteinFamily | None = None) -> Fn:
    """``T_rho f = sum_S rho^{|S|} f^{=S}``."""
    rho = _check_rho(rho)
    family = family or es_all(mu, f)
    total = np.zeros(mu.n_faces)
    for s, comp in family.components.items():
        total += rho ** subsets.size(s) * lift(comp).values
    return Fn(mu, mu.full, total)


def compose_noise(mu: WeightedComplex, f: Fn, outer: float, inner_rho: float) -> Fn:
    """``T_outer T_inner f``; equals ``T_{outer * inner}`` on exact products."""
    return noise_direct(mu, noise_direct(mu, f, inner_rho), outer)


def stability(mu: WeightedComplex, f: Fn, rho: float) -> float:
    """``||T_rho f||^2``."""
    return norm2(noise_direct(mu, f, rho)) ** 2


def updown(mu: WeightedComplex, f: Fn) -> Fn:
    """``T f = (1/k) sum_i A_{[k] \\ {i}} f``."""
    if mu.k < 1:
        raise InvalidParameter("the up-down walk needs k >= 1")
    total = np.zeros(mu.n_faces)
    for i in range(mu.k):
        total += average_to(mu, f, mu.full & ~(1 << i)).values
    return Fn(mu, mu.full, total / mu.k)


def updown_spectral(mu: WeightedComplex, f: Fn, family: EfronSteinFamily | None = None) -> Fn:
    """``T f = sum_S ((k - |S|) / k) f^{=S}``."""
    if mu.k < 1:
        raise InvalidParameter("the up-down walk needs k >= 1")
    family = family or es_all(mu, f)
    total = np.zeros(mu.n_faces)
    for s, comp in family.components.items():
        share = (mu.k - subsets.size(s)) / mu.k
        if share:
            total += share * lift(comp).values
    return Fn(mu, mu.full, total)


def walk_gap(mu: WeightedComplex, f: Fn) -> float:
    """``<f - T f, f>``."""
    return inner(f - updown(mu, f), f)


def _require_boolean(f: Fn) -> None:
    if not f.is_boolean():
        bad = f.values[(np.abs(f.values) > 1e-12) & (np.abs(f.values - 1.0) > 1e-12)]
        raise NotBoolean(f"function takes non-Boolean value {float(bad[0])!r}")


def noise_lemma_check(
    mu: WeightedComplex,
    f: Fn,
    rho: float,
    d: int,
    epsilon: float,
    *,
    family: EfronSteinFamily | None = None,
    check_id: str = "C18-sse",
) -> CheckRecord:
    """``||T_rho f||^2 - ||f^{<=d}||^2 - rho^d ||f||^2 <= 2^{4k} eps ||f||^2``."""
    family = family or es_all(mu, f)
    nf2 = norm2(f) ** 2
    lhs = stability(mu, f, rho) - norm2(low_degree(family, d)) ** 2 - rho**d * nf2
    return bound_record(
        check_id, "noise-lemma", lhs, 2.0 ** (4 * mu.k) * epsilon * nf2, detail={"rho": rho, "d": d}
    )


def sse_bound(rho: float, d: int, delta: float) -> float:
    """Explicit small-set-expansion factor ``rho^d + (100d)^d delta^2``."""
    return rho**d + (100.0 * d) ** d * delta**2


def check_sse(
    mu: WeightedComplex,
    f: Fn,
    rho: float,
    d: int,
    delta: float,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    check_id: str = "C18-sse",
) -> CheckRecord:
    """``||T_rho f||^2 <= (rho^d + (100d)^d delta^2 + O_k(sqrt eps)) ||f||^2`` for global Boolean ``f``."""
    rho = _check_rho(rho)
    _require_boolean(f)
    require_global(mu, f, d, delta)
    nf2 = norm2(f) ** 2
    return residual_record(
        check_id,
        "sse",
        stability(mu, f, rho),
        sse_bound(rho, d, delta) * nf2,
        math.sqrt(epsilon) * nf2,
        epsilon,
        ceiling=ceiling,
        epsilon_floor=epsilon_floor,
        detail={"rho": rho, "d": d, "delta": f"{delta:.6g}"},
    )


def check_fourier_concentration(
    mu: WeightedComplex,
    f: Fn,
    d: int,
    delta: float,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    family: EfronSteinFamily | None = None,
    check_id: str = "C17-fourier-concentration",
) -> CheckRecord:
    """``||f^{<=d}||^2 <= ((200d)^d delta^{1/2} + O_k(sqrt eps)) ||f||^2`` for global Boolean ``f``."""
    _require_boolean(f)
    require_global(mu, f, d, delta)
    family = family or es_all(mu, f)
    nf2 = norm2(f) ** 2
    return residual_record(
        check_id,
        "low-degree-weight",
        norm2(low_degree(family, d)) ** 2,
        (200.0 * d) ** d * math.sqrt(delta) * nf2,
        math.sqrt(epsilon) * nf2,
        epsilon,
        ceiling=ceiling,
        epsilon_floor=epsilon_floor,
        detail={"d": d, "delta": f"{delta:.6g}"},
    )


def sse_negative_control(
    mu: WeightedComplex, f: Fn, rho: float, d: int, *, check_id: str = "C18-sse"
) -> CheckRecord:
    """A non-global ``f`` must exceed the global bound evaluated at ``delta = (200d)^{-d}``.

    PASS means the bound is violated, i.e. the conclusion genuinely needs globalness.
    """
    rho = _check_rho(rho)
    delta = (200.0 * d) ** (-d)
    lhs = stability(mu, f, rho)
    rhs = sse_bound(rho, d, delta) * norm2(f) ** 2
    exceeds = lhs > rhs + EXACT_TOLERANCE * max(1.0, abs(lhs), abs(rhs))
    if not exceeds:
        logger.warning("Negative control did not exceed the SSE bound: %.6e <= %.6e", lhs, rhs)
    return CheckRecord(
        check_id=check_id,
        variant="negative-control",
        lhs=lhs,
        rhs_explicit=rhs,
        residual=rhs - lhs,
        residual_ratio=None,
        status=Status.PASS if exceeds else Status.FAIL,
        detail={
            "rho": rho,
            "d": d,
            "delta": f"{delta:.6g}",
            "delta_min": f"{globalness(mu, f, d).delta_min:.6g}",
        },
    )


@dataclass(frozen=True, eq=False)
class ShadowSet:
    """Codimension-one faces ``(i, x)`` below some top face of ``A``.

    ``members[i]`` flags points of ``mu_{[k] \\ {i}}``; ``weights[i]`` is the
    down-measure ``mu_{[k] \\ {i}}(x) / k`` of every such point.
    """

    complex: WeightedComplex
    members: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]

    @property
    def measure(self) -> float:
        return math.fsum(float(np.add.reduce(w[m])) for m, w in zip(self.members, self.weights))

    @property
    def total_mass(self) -> float:
        return math.fsum(float(np.add.reduce(w)) for w in self.weights)

    @property
    def size(self) -> int:
        return int(sum(int(np.count_nonzero(m)) for m in self.members))

    def faces(self) -> Iterator[tuple[int, PartialAssignment]]:
        mu = self.complex
        for i, flags in enumerate(self.members):
            subset = mu.full & ~(1 << i)
            points = mu.projection(subset).points
            for index in np.flatnonzero(flags):
                yield i, PartialAssignment(subset, tuple(int(v) for v in points[index]))


def shadow(mu: WeightedComplex, a: Fn, *, threads: int = 1) -> ShadowSet:
    if a.home != mu.full:
        raise DomainMismatch("shadow needs an indicator on top faces")
    _require_boolean(a)
    if mu.k < 1:
        raise InvalidParameter("shadow needs k >= 1")

    def drop(i: int) -> tuple[np.ndarray, np.ndarray]:
        proj = mu.projection(mu.full & ~(1 << i))
        hits = np.bincount(proj.inverse, weights=a.values, minlength=proj.size)
        return hits > 0, proj.masses / mu.k

    if threads > 1 and mu.k > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(drop, range(mu.k)))
    else:
        parts = [drop(i) for i in range(mu.k)]
    return ShadowSet(mu, tuple(p[0] for p in parts), tuple(p[1] for p in parts))


def kk_threshold(d: int) -> float:
    """Largest admissible delta ``(200d)^{-d}``."""
    return (200.0 * d) ** (-d)


def check_kk(
    mu: WeightedComplex,
    a: Fn,
    d: int,
    delta: float,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    strict: bool = True,
    threads: int = 1,
    check_id: str = "C19-kruskal-katona",
) -> list[CheckRecord]:
    """Shadow lower bound ``mu(dA) >= mu(A)(1 + d/2k)`` with the walk identities behind it.

    With ``strict=False`` failed preconditions are recorded and the shadow bound
    is reported instead of raising.
    """
    _require_boolean(a)
    if d < 1 or d > mu.k:
        raise InvalidParameter(f"d={d} outside [1, {mu.k}]")
    precondition: str | None = None
    try:
        if delta > kk_threshold(d):
            raise PreconditionDelta(f"delta={delta:.6g} exceeds (200d)^(-d)={kk_threshold(d):.6g}")
        require_global(mu, a, d, delta)
    except HdxError as exc:
        if strict:
            raise
        precondition = str(exc)
        logger.info("Kruskal-Katona preconditions fail, reporting only: %s", precondition)

    boundary = shadow(mu, a, threads=threads)
    mass = expectation(a)
    down = boundary.measure
    gap = walk_gap(mu, a)
    family = es_all(mu, a)
    nf2 = norm2(a) ** 2
    detail = {"d": d, "delta": f"{delta:.6g}"}
    if precondition:
        detail["precondition"] = precondition

    high = norm2(high_degree(family, d)) ** 2
    half = 0.5 * nf2
    target = mass * (1.0 + d / (2.0 * mu.k))
    if precondition:
        main = report_record(check_id, "shadow", target, down, ceiling=ceiling, detail=detail)
    else:
        main = residual_record(
            check_id,
            "shadow",
            target,
            down,
            math.sqrt(epsilon) * nf2,
            epsilon,
            ceiling=ceiling,
            epsilon_floor=epsilon_floor,
            detail=detail,
        )
    records = [
        main,
        bound_record(check_id, "walk-identity", gap, down - mass, detail=detail),
        residual_record(
            check_id,
            "walk-gap",
            d / mu.k * high,
            gap,
            epsilon * nf2,
            epsilon,
            ceiling=ceiling,
            epsilon_floor=epsilon_floor,
            detail=detail,
        ),
    ]
    if precondition is None and delta <= (200.0 * d) ** (-2 * d):
        records.append(
            residual_record(
                check_id,
                "high-degree",
                half,
                high,
                math.sqrt(epsilon) * nf2,
                epsilon,
                ceiling=ceiling,
                epsilon_floor=epsilon_floor,
                detail=detail,
            )
        )
    else:
        records.append(report_record(check_id, "high-degree", half, high, ceiling=ceiling, detail=detail))
    logger.debug("Shadow of %d faces: mu(A)=%.6e mu(dA)=%.6e gap=%.6e", boundary.size, mass, down, gap)
    return records


__all__ = [
    "noise_direct",
    "noise_spectral",
    "compose_noise",
    "stability",
    "updown",
    "updown_spectral",
    "walk_gap",
    "noise_lemma_check",
    "sse_bound",
    "check_sse",
    "check_fourier_concentration",
    "sse_negative_control",
    "ShadowSet",
    "shadow",
    "kk_threshold",
    "check_kk",
]
