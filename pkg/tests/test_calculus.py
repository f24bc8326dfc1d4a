from __future__ import annotations

import math

import numpy as np
import pytest

from hdx.core import subsets
from hdx.core.calculus import (
    check_derivative_family,
    check_global_bounds,
    check_global_components,
    check_influence_bounds,
    derivative,
    globalness,
    influence,
    influence_profile,
    influence_sum,
    laplacian,
    laplacian_trunc,
    laplacian_via_components,
    max_influence,
    require_global,
)
from hdx.core.decomposition import es_all
from hdx.core.errors import DegreeTooSmall, InvalidParameter, NotGlobal
from hdx.core.generators import gen_product, gen_sparse_random, random_set, rng_for
from hdx.core.measure_space import Fn, PartialAssignment, indicator, norm2
from hdx.core.records import Status


def _gaussian(mu, seed: int) -> Fn:
    return Fn(mu, mu.full, rng_for(seed, 77).standard_normal(mu.n_faces))


def test_laplacian_forms_agree_on_any_measure() -> None:
    mu = gen_sparse_random((3, 2, 2), 0.7, seed=4)
    f = _gaussian(mu, 1)
    family = es_all(mu, f)
    for s in range(1 << mu.k):
        np.testing.assert_allclose(
            laplacian(mu, f, s).values, laplacian_via_components(mu, f, s, family).values, atol=1e-10
        )
    np.testing.assert_allclose(laplacian(mu, f, 0).values, f.values)


def test_profile_matches_link_influences() -> None:
    mu = gen_sparse_random((3, 3, 2), 0.7, seed=8)
    f = _gaussian(mu, 2)
    for s in (0b001, 0b011, 0b110):
        profile = influence_profile(mu, f, s, 2)
        for index, x in enumerate(mu.assignments(s)):
            assert math.isclose(profile.influence[index], influence(mu, f, s, x), rel_tol=1e-9, abs_tol=1e-12)
        rows = list(profile.rows())
        assert rows[0][0] == subsets.fmt(s)
        assert len(rows) == mu.support_size(s)


def test_derivative_lives_on_the_link() -> None:
    mu = gen_product((2, 3, 2), seed=1)
    f = _gaussian(mu, 3)
    x = PartialAssignment(0b001, (1,))
    d = derivative(mu, f, 0b001, x)
    assert d.complex.k == 2
    assert d.complex.origin == (1, 2)
    with pytest.raises(InvalidParameter):
        derivative(mu, f, 0b010, x)


def test_truncated_laplacian_needs_small_subsets() -> None:
    mu = gen_product((2, 2, 2))
    f = _gaussian(mu, 1)
    with pytest.raises(DegreeTooSmall):
        laplacian_trunc(mu, f, 0b011, 1)


def test_influence_sum_on_products() -> None:
    mu = gen_product((2, 3, 2), seed=6)
    f = _gaussian(mu, 5)
    family = es_all(mu, f)
    expected = math.fsum(2.0 ** subsets.size(s) * norm2(comp) ** 2 for s, comp in family.components.items())
    assert math.isclose(influence_sum(mu, f), expected, rel_tol=1e-9)


def test_dictator_globalness() -> None:
    mu = gen_product((2, 2, 2))
    f = indicator(mu, 0, 1)
    report = globalness(mu, f, 1)
    assert math.isclose(report.delta_min, 1.0)
    assert report.witness_subset == 0b001
    assert report.witness_point.values == (1,)
    assert math.isclose(globalness(mu, f, 0).delta_min, math.sqrt(0.5))
    assert math.isclose(max_influence(mu, f, 1), 0.5)
    with pytest.raises(NotGlobal):
        require_global(mu, f, 1, 0.5)
    with pytest.raises(InvalidParameter):
        globalness(mu, f, 4)
    assert report.to_dict()["witness_subset"] == [0]


def test_global_bounds_on_products() -> None:
    mu = gen_product((4, 4, 4), seed=2)
    f = random_set(mu, 0.3, seed=2)
    delta = globalness(mu, f, 1).delta_min
    records = check_global_bounds(mu, f, 1, delta, 0.0, ceiling=1e6)
    assert {r.check_id for r in records} == {"C13-global-component", "C14-influence-bounds"}
    assert all(r.status is Status.PASS for r in records), [r.to_dict() for r in records if r.status is not Status.PASS]


@pytest.mark.parametrize("sizes", [(2, 2, 2), (3, 3, 3), (4, 3, 2)])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_influence_bounds_at_degree_two_on_products(sizes, seed) -> None:
    mu = gen_product(sizes, seed=seed)
    f = _gaussian(mu, seed)
    delta = globalness(mu, f, 2).delta_min
    records = check_influence_bounds(mu, f, 2, delta, 0.0, ceiling=1e6)
    assert len(records) == 2 * len(subsets.by_size(3, 2))
    assert {r.detail["d"] for r in records} == {2}
    assert all(r.status is Status.PASS for r in records), [r.to_dict() for r in records if r.status is not Status.PASS]


def test_global_bounds_combine_both_checks() -> None:
    mu = gen_product((3, 2, 2), seed=5)
    f = _gaussian(mu, 5)
    delta = globalness(mu, f, 2).delta_min
    components = check_global_components(mu, f, 2, delta)
    influences = check_influence_bounds(mu, f, 2, delta, 0.0, ceiling=1e6)
    combined = check_global_bounds(mu, f, 2, delta, 0.0, ceiling=1e6)
    assert {r.check_id for r in components} == {"C13-global-component"}
    assert {r.check_id for r in influences} == {"C14-influence-bounds"}
    assert [r.to_dict() for r in combined] == [r.to_dict() for r in components + influences]
    with pytest.raises(NotGlobal):
        check_global_components(mu, f, 2, delta / 2)


def test_component_sup_norm_holds_off_products() -> None:
    mu = gen_sparse_random((3, 3, 3), 0.5, seed=3)
    f = random_set(mu, 0.4, seed=3)
    delta = globalness(mu, f, 2).delta_min
    records = check_global_bounds(mu, f, 2, delta, 0.3, ceiling=1e6)
    sup = [r for r in records if r.check_id == "C13-global-component"]
    assert len(sup) == len(subsets.by_size(3, 2))
    assert all(r.status is Status.PASS for r in sup)
    assert all(r.status is Status.REPORT for r in records if r.check_id == "C14-influence-bounds")


def test_derivative_family_matches_components_on_products() -> None:
    mu = gen_product((2, 3, 2), seed=7)
    f = _gaussian(mu, 7)
    records = check_derivative_family(mu, f, 0b001, 0.0, ceiling=1e6)
    assert len(records) == 4
    assert all(r.status is Status.PASS for r in records)
