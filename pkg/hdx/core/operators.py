"""Averaging operators and spectral certification of epsilon-product measures.

``avg(mu, f, T)`` is the conditional expectation ``A_{S,T} f`` of a function
with home ``S`` given ``x_T``.  ``certify_epsilon`` enumerates every link of
codimension at least two and every 2-coordinate skeleton of it, and returns the
largest second singular value found.
"""
from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import subsets
from .errors import DomainMismatch, InvalidParameter
from .measure_space import Fn, PartialAssignment, WeightedComplex, expectation, lift, norm2, norm_p
from .records import CheckRecord, bound_record
from .skeleton_cache import SkeletonCache, skeleton_key

logger = logging.getLogger(__name__)

# Singular values below this are rounding noise on exact products.
SIGMA_FLOOR = 1e-12


def _require_on(mu: WeightedComplex, f: Fn) -> None:
    if not f.complex.same_as(mu):
        raise DomainMismatch(f"function lives on complex {f.complex.complex_id}, not {mu.complex_id}")


def avg(mu: WeightedComplex, f: Fn, target: int) -> Fn:
    """``A_{S,T} f`` for ``f`` with home ``S``; result has home ``T``."""
    _require_on(mu, f)
    subsets.validate(target, mu.k)
    if target == f.home:
        return f
    if subsets.is_subset(f.home, target):
        return lift(f, to=target)
    source = mu.projection(f.home)
    dest = mu.projection(target)
    per_face = f.values[source.inverse]
    sums = np.bincount(dest.inverse, weights=mu.weights * per_face, minlength=dest.size)
    return Fn(mu, target, sums / dest.masses)


def average_to(mu: WeightedComplex, f: Fn, target: int) -> Fn:
    """``A_T f`` lifted back to home ``[k]``."""
    return lift(avg(mu, f, target))


def _deflated_top_singular(joint: np.ndarray) -> float:
    """Largest singular value of the normalized joint table with the constant pair removed."""
    total = float(joint.sum())
    if total <= 0:
        return 0.0
    joint = joint / total
    rows = joint.sum(axis=1)
    cols = joint.sum(axis=0)
    joint = joint[rows > 0][:, cols > 0]
    rows, cols = rows[rows > 0], cols[cols > 0]
    if joint.shape[0] < 2 or joint.shape[1] < 2:
        return 0.0
    sr, sc = np.sqrt(rows), np.sqrt(cols)
    normalized = joint / np.outer(sr, sc) - np.outer(sr, sc)
    sigma = float(scipy.linalg.svd(normalized, compute_uv=False, lapack_driver="gesvd")[0])
    if sigma < SIGMA_FLOOR:
        return 0.0
    return min(sigma, 1.0)


def opnorm_perp(mu: WeightedComplex, source: int, target: int) -> float:
    """``||A_{S,T} - E||`` on ``L2(mu_S)``, i.e. the second singular value of the normalized operator."""
    src = mu.projection(source)
    dst = mu.projection(target)
    codes = dst.inverse * src.size + src.inverse
    joint = np.bincount(codes, weights=mu.weights, minlength=dst.size * src.size).reshape(dst.size, src.size)
    return _deflated_top_singular(joint)


@dataclass(frozen=True)
class SkeletonWitness:
    """Second singular value of the ``{i, j}`` skeleton of the link at ``link``."""

    link: PartialAssignment
    pair: tuple[int, int]
    sigma: float

    def to_dict(self) -> dict:
        return {
            "subset": list(subsets.bits(self.link.subset)),
            "values": list(self.link.values),
            "pair": list(self.pair),
            "sigma": self.sigma,
        }


@dataclass(frozen=True)
class EpsCertificate:
    complex_id: str
    epsilon: float
    witnesses: tuple[SkeletonWitness, ...]

    def top(self, n: int) -> list[SkeletonWitness]:
        ranked = sorted(enumerate(self.witnesses), key=lambda item: (-item[1].sigma, item[0]))
        return [w for _, w in ranked[: max(0, n)]]

    @property
    def argmax(self) -> SkeletonWitness | None:
        best = self.top(1)
        return best[0] if best else None


def _link_tasks(mu: WeightedComplex) -> Iterator[tuple[int, int, np.ndarray]]:
    for subset in subsets.by_size(mu.k, mu.k - 2):
        proj = mu.projection(subset)
        order, offsets = proj.blocks
        for point in range(proj.size):
            yield subset, point, order[offsets[point]:offsets[point + 1]]


def _certify_link(
    mu: WeightedComplex,
    subset: int,
    point: int,
    rows: np.ndarray,
    cache: SkeletonCache | None,
) -> list[SkeletonWitness]:
    values = tuple(int(v) for v in mu.projection(subset).points[point])
    x = PartialAssignment(subset, values)
    rest = subsets.bits(mu.full & ~subset)
    faces = mu.faces[rows]
    weights = mu.weights[rows]
    out = []
    for i, j in itertools.combinations(rest, 2):
        key = skeleton_key(x.encode(), (i, j))
        sigma = cache.get(mu.complex_id, key) if cache is not None else None
        if sigma is None:
            n_j = mu.universe.sizes[j]
            codes = faces[:, i].astype(np.int64) * n_j + faces[:, j]
            joint = np.bincount(codes, weights=weights, minlength=mu.universe.sizes[i] * n_j)
            sigma = _deflated_top_singular(joint.reshape(mu.universe.sizes[i], n_j))
            if cache is not None:
                cache.update(mu.complex_id, key, sigma)
        out.append(SkeletonWitness(x, (i, j), sigma))
    return out


def certify_epsilon(
    mu: WeightedComplex,
    *,
    threads: int = 1,
    cache: SkeletonCache | None = None,
) -> EpsCertificate:
    """Certified epsilon: max second singular value over all links and skeleton pairs."""
    if mu.k < 2:
        raise InvalidParameter(f"certification needs k >= 2, got k={mu.k}")

    def build() -> EpsCertificate:
        tasks = list(_link_tasks(mu))
        if threads > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(pool.map(lambda t: _certify_link(mu, *t, cache), tasks))
        else:
            chunks = [_certify_link(mu, *t, cache) for t in tasks]
        witnesses = tuple(w for chunk in chunks for w in chunk)
        epsilon = max((w.sigma for w in witnesses), default=0.0)
        logger.info(
            "Certified epsilon=%.6e for complex %s over %d links, %d witnesses",
            epsilon,
            mu.complex_id,
            len(tasks),
            len(witnesses),
        )
        return EpsCertificate(mu.complex_id, epsilon, witnesses)

    return mu._cached(("certificate",), build)


def _reduce_to(mu: WeightedComplex, f: Fn, subset: int) -> Fn:
    if f.home == subset:
        return f
    if not subsets.is_subset(subset, f.home):
        raise DomainMismatch(f"cannot view a function on {subsets.fmt(f.home)} as one on {subsets.fmt(subset)}")
    return avg(mu, f, subset)


def check_disjoint_avg(
    mu: WeightedComplex,
    f: Fn,
    source: int,
    target: int,
    epsilon: float,
    *,
    check_id: str = "C6-disjoint-avg",
) -> CheckRecord:
    """``||A_{S,T} f - E f||^2 <= |S||T| eps^2 ||f||^2`` for disjoint ``S, T``."""
    if source & target:
        raise InvalidParameter(f"{subsets.fmt(source)} and {subsets.fmt(target)} are not disjoint")
    g = _reduce_to(mu, f, source)
    moved = avg(mu, g, target) - expectation(g)
    lhs = norm2(moved) ** 2
    rhs = subsets.size(source) * subsets.size(target) * epsilon**2 * norm2(g) ** 2
    return bound_record(
        check_id, "disjoint", lhs, rhs, detail={"S": subsets.fmt(source), "T": subsets.fmt(target)}
    )


def check_composition(
    mu: WeightedComplex,
    f: Fn,
    first: int,
    second: int,
    epsilon: float,
    *,
    check_id: str = "C7-composition",
) -> CheckRecord:
    """``||A_{T2} A_{T1} f - A_{T1 & T2} f|| <= |T1||T2| eps ||f||`` for ``f`` on ``[k]``."""
    _require_on(mu, f)
    composed = average_to(mu, average_to(mu, f, first), second)
    direct = average_to(mu, f, first & second)
    lhs = norm2(composed - direct)
    rhs = subsets.size(first) * subsets.size(second) * epsilon * norm2(f)
    return bound_record(
        check_id, "composition", lhs, rhs, detail={"T1": subsets.fmt(first), "T2": subsets.fmt(second)}
    )


def check_intersection_avg(
    mu: WeightedComplex,
    f: Fn,
    source: int,
    target: int,
    epsilon: float,
    *,
    check_id: str = "C7-composition",
) -> CheckRecord:
    """``||A_{S,T} f - A_{S,S&T} f||^2 <= |S||T| eps^2 ||f||^2``."""
    g = _reduce_to(mu, f, source)
    onto = avg(mu, g, target)
    via = lift(avg(mu, g, source & target), to=target)
    lhs = norm2(onto - via) ** 2
    rhs = subsets.size(source) * subsets.size(target) * epsilon**2 * norm2(g) ** 2
    return bound_record(
        check_id, "intersection", lhs, rhs, detail={"S": subsets.fmt(source), "T": subsets.fmt(target)}
    )


def check_contraction(
    mu: WeightedComplex,
    f: Fn,
    source: int,
    target: int,
    *,
    check_id: str = "C5-contraction",
) -> list[CheckRecord]:
    """``||A_{S,T} f||_p <= ||f||_p`` for p in {2, 4, inf}."""
    g = _reduce_to(mu, f, source)
    moved = avg(mu, g, target)
    detail = {"S": subsets.fmt(source), "T": subsets.fmt(target)}
    return [
        bound_record(check_id, f"avg-L{label}", norm_p(moved, p), norm_p(g, p), detail=detail)
        for label, p in (("2", 2.0), ("4", 4.0), ("inf", float("inf")))
    ]


__all__ = [
    "SIGMA_FLOOR",
    "avg",
    "average_to",
    "opnorm_perp",
    "SkeletonWitness",
    "EpsCertificate",
    "certify_epsilon",
    "check_disjoint_avg",
    "check_composition",
    "check_intersection_avg",
    "check_contraction",
]
