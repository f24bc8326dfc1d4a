from __future__ import annotations

import math

import pytest

from hdx.core.calculus import globalness
from hdx.core.errors import InvalidParameter, NotGlobal
from hdx.core.generators import gen_perturbed_product, gen_product, random_low_degree
from hdx.core.hypercontractivity import (
    bonami_bound,
    check_hdx_hypercontractivity,
    check_product_hypercontractivity,
    influence_sum_bound,
    is_uniform_cube,
)
from hdx.core.measure_space import indicator
from hdx.core.records import Status


@pytest.mark.parametrize("d", [1, 2])
def test_product_bounds_on_the_cube(d: int) -> None:
    mu = gen_product((2, 2, 2))
    f = random_low_degree(mu, d, seed=d)
    records = check_product_hypercontractivity(mu, f, d, 0.0, ceiling=1e6)
    variants = {r.variant for r in records}
    assert variants == {"influence-sum", "fourth-moment", "influence-global", "inductive", "bonami"}
    assert all(r.status is Status.PASS for r in records), [r.to_dict() for r in records]


def test_product_bounds_with_random_marginals() -> None:
    mu = gen_product((3, 2, 2), seed=4)
    f = random_low_degree(mu, 2, seed=4)
    records = check_product_hypercontractivity(mu, f, 2, 0.0, ceiling=1e6)
    assert "bonami" not in {r.variant for r in records}
    assert all(r.status is Status.PASS for r in records)


def test_bonami_only_on_the_uniform_cube() -> None:
    cube = gen_product((2, 2, 2))
    assert is_uniform_cube(cube)
    skewed = gen_product((2, 2, 2), seed=1)
    assert not is_uniform_cube(skewed)
    assert not is_uniform_cube(gen_product((3, 2)))
    with pytest.raises(InvalidParameter):
        bonami_bound(skewed, indicator(skewed, 0, 1), 1)
    bound = bonami_bound(cube, indicator(cube, 0, 1), 1)
    assert bound.lhs <= bound.rhs


def test_influence_sum_bound_for_a_dictator() -> None:
    mu = gen_product((2, 2))
    bound = influence_sum_bound(mu, indicator(mu, 0, 1), 1)
    assert math.isclose(bound.lhs, 0.5 + 0.25)
    assert math.isclose(bound.rhs, 1.0)


def test_hdx_bounds_are_hard_on_products() -> None:
    mu = gen_product((2, 2, 2))
    f = random_low_degree(mu, 1, seed=3)
    delta = globalness(mu, f, 1).delta_min
    records = check_hdx_hypercontractivity(mu, f, 1, delta, 0.0, ceiling=1e6)
    assert [r.variant for r in records] == ["laplacian-moments", "main", "main-global", "global"]
    assert all(r.status is Status.PASS for r in records)


def test_hdx_bounds_report_on_perturbed_products() -> None:
    product = gen_perturbed_product((2, 2, 2), 0.05, seed=1)
    mu = product.complex
    f = random_low_degree(mu, 1, seed=3)
    delta = globalness(mu, f, 1).delta_min
    records = check_hdx_hypercontractivity(mu, f, 1, delta, product.certificate.epsilon, ceiling=1e6)
    assert all(r.status is Status.REPORT for r in records)
    assert all(r.ceiling == 1e6 for r in records)
    with pytest.raises(NotGlobal):
        check_hdx_hypercontractivity(mu, f, 1, delta / 2, product.certificate.epsilon, ceiling=1e6)
