from __future__ import annotations

import math

import numpy as np
import pytest

from hdx.core.decomposition import es_all, high_degree
from hdx.core.errors import InvalidParameter, NotBoolean, PreconditionDelta
from hdx.core.generators import gen_perturbed_product, gen_product, gen_sparse_random, rng_for, scattered_set
from hdx.core.measure_space import Fn, indicator, norm2
from hdx.core.records import Status
from hdx.core.walks import (
    check_kk,
    compose_noise,
    kk_threshold,
    noise_direct,
    noise_lemma_check,
    noise_spectral,
    shadow,
    sse_negative_control,
    stability,
    updown,
    updown_spectral,
    walk_gap,
)


def _gaussian(mu, seed: int) -> Fn:
    return Fn(mu, mu.full, rng_for(seed, 77).standard_normal(mu.n_faces))


@pytest.mark.parametrize("rho", [0.0, 0.3, 0.5, 1.0])
def test_noise_forms_agree_on_any_measure(rho: float) -> None:
    mu = gen_sparse_random((3, 2, 2), 0.7, seed=2)
    f = _gaussian(mu, 1)
    np.testing.assert_allclose(noise_direct(mu, f, rho).values, noise_spectral(mu, f, rho).values, atol=1e-10)


def test_updown_forms_agree_on_any_measure() -> None:
    mu = gen_sparse_random((2, 3, 2, 2), 0.6, seed=5)
    f = _gaussian(mu, 2)
    np.testing.assert_allclose(updown(mu, f).values, updown_spectral(mu, f).values, atol=1e-10)


def test_noise_semigroup_on_products() -> None:
    mu = gen_product((3, 2, 2), seed=3)
    f = _gaussian(mu, 3)
    np.testing.assert_allclose(compose_noise(mu, f, 0.5, 0.6).values, noise_direct(mu, f, 0.3).values, atol=1e-12)


def test_noise_rejects_bad_rho() -> None:
    mu = gen_product((2, 2))
    with pytest.raises(InvalidParameter):
        noise_direct(mu, Fn.zeros(mu), 1.5)


def test_noise_lemma_on_products_and_perturbations() -> None:
    mu = gen_product((2, 2, 2), seed=1)
    f = _gaussian(mu, 4)
    assert noise_lemma_check(mu, f, 0.5, 1, 0.0).status is Status.PASS
    product = gen_perturbed_product((2, 2, 2), 0.05, seed=1)
    g = _gaussian(product.complex, 4)
    assert noise_lemma_check(product.complex, g, 0.5, 1, product.certificate.epsilon).status is Status.PASS


def test_dictator_negative_control() -> None:
    mu = gen_product((2, 2, 2))
    f = indicator(mu, 0, 1)
    assert math.isclose(stability(mu, f, 0.5), 5.0 / 16.0)
    record = sse_negative_control(mu, f, 0.5, 1)
    assert record.status is Status.PASS
    assert math.isclose(record.rhs_explicit, 0.25125)
    assert record.detail["delta_min"] == "1"


def test_shadow_of_one_face() -> None:
    mu = gen_product((2, 2, 2))
    values = np.zeros(mu.n_faces)
    values[0] = 1.0
    boundary = shadow(mu, Fn(mu, mu.full, values))
    assert boundary.size == 3
    assert math.isclose(boundary.measure, 0.25)
    assert math.isclose(boundary.total_mass, 1.0)
    faces = list(boundary.faces())
    assert [i for i, _ in faces] == [0, 1, 2]
    assert all(x.values == (0, 0) for _, x in faces)


def test_shadow_needs_an_indicator() -> None:
    mu = gen_product((2, 2))
    with pytest.raises(NotBoolean):
        shadow(mu, Fn.constant(mu, 0.5))


def test_kk_walk_identity_and_preconditions() -> None:
    mu = gen_product((5, 5, 5))
    a = scattered_set(mu, 3, seed=1)
    assert math.isclose(a.values.sum(), 3.0)
    with pytest.raises(PreconditionDelta):
        check_kk(mu, a, 1, 0.1, 0.0, ceiling=1e6)
    records = check_kk(mu, a, 1, 0.1, 0.0, ceiling=1e6, strict=False)
    by_variant = {r.variant: r for r in records}
    assert set(by_variant) == {"shadow", "walk-identity", "walk-gap", "high-degree"}
    assert by_variant["walk-identity"].status is Status.PASS
    assert by_variant["shadow"].status is Status.REPORT
    assert "precondition" in by_variant["shadow"].detail
    assert math.isclose(by_variant["walk-identity"].lhs, walk_gap(mu, a))


def test_kk_threshold() -> None:
    assert math.isclose(kk_threshold(1), 1.0 / 200.0)
    assert math.isclose(kk_threshold(2), 1.0 / 160000.0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_walk_gap_dominates_high_degree_tail_on_products(d: int) -> None:
    mu = gen_product((3, 2, 2), seed=6)
    f = _gaussian(mu, 6)
    family = es_all(mu, f)
    gap = walk_gap(mu, f)
    spectral = sum(bin(s).count("1") / mu.k * norm2(c) ** 2 for s, c in family.components.items())
    assert math.isclose(gap, spectral, rel_tol=1e-9)
    assert gap >= d / mu.k * norm2(high_degree(family, d)) ** 2 - 1e-12
