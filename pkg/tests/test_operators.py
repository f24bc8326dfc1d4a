from __future__ import annotations

import json
import math

import numpy as np
import pytest

from hdx.core.errors import DomainMismatch, InvalidParameter
from hdx.core.generators import gen_eta_correlated, gen_perturbed_product, gen_product, gen_sparse_random, rng_for
from hdx.core.measure_space import Fn, expectation, inner
from hdx.core.operators import (
    avg,
    average_to,
    certify_epsilon,
    check_composition,
    check_contraction,
    check_disjoint_avg,
    check_intersection_avg,
    opnorm_perp,
)
from hdx.core.records import Status
from hdx.core.skeleton_cache import SkeletonCache


@pytest.mark.parametrize("eta", [0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99])
def test_eta_correlated_certificate_equals_eta(eta: float) -> None:
    mu = gen_eta_correlated(eta)
    cert = certify_epsilon(mu, cache=None)
    assert math.isclose(cert.epsilon, eta, abs_tol=1e-12)
    assert math.isclose(opnorm_perp(mu, 0b01, 0b10), eta, abs_tol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_products_certify_to_zero(seed: int) -> None:
    mu = gen_product((3, 2, 2), seed=seed)
    assert certify_epsilon(mu, cache=None).epsilon <= 1e-10


def test_certificate_needs_two_parts() -> None:
    with pytest.raises(InvalidParameter):
        certify_epsilon(gen_product((3,)))


def test_certificate_top_is_sorted() -> None:
    mu = gen_perturbed_product((3, 2, 2), 0.05, seed=4).complex
    cert = certify_epsilon(mu)
    top = cert.top(3)
    assert top[0].sigma == cert.epsilon
    assert [w.sigma for w in top] == sorted((w.sigma for w in top), reverse=True)
    assert cert.argmax == top[0]
    assert cert.epsilon > 0


def test_threaded_certificate_matches_serial() -> None:
    serial = certify_epsilon(gen_sparse_random((3, 2, 2), 0.8, 3), cache=None)
    threaded = certify_epsilon(gen_sparse_random((3, 2, 2), 0.8, 3), threads=4, cache=None)
    assert threaded.epsilon == serial.epsilon
    assert [w.sigma for w in threaded.witnesses] == [w.sigma for w in serial.witnesses]


def test_skeleton_cache_persists(tmp_path) -> None:
    path = tmp_path / "skeletons.json"
    cache = SkeletonCache(path)
    mu = gen_product((2, 2, 2), seed=9)
    cert = certify_epsilon(mu, cache=cache)
    assert cache.size(mu.complex_id) == len(cert.witnesses)
    cache.flush()
    stored = json.loads(path.read_text(encoding="utf-8"))
    assert mu.complex_id in stored

    reloaded = SkeletonCache(path)
    assert reloaded.size() == cache.size()


def test_avg_edges() -> None:
    mu = gen_product((2, 3), seed=1)
    f = Fn(mu, mu.full, rng_for(1, 99).standard_normal(mu.n_faces))
    assert avg(mu, f, mu.full) is f
    constant = avg(mu, f, 0)
    assert constant.home == 0
    assert math.isclose(constant.values[0], expectation(f), rel_tol=1e-12)
    tower = avg(mu, avg(mu, f, 0b01), 0)
    assert math.isclose(tower.values[0], expectation(f), rel_tol=1e-12)
    lifted = average_to(mu, f, 0b10)
    assert lifted.home == mu.full


def test_avg_rejects_foreign_function() -> None:
    mu = gen_product((2, 2), seed=1)
    other = gen_product((2, 2), seed=2)
    with pytest.raises(DomainMismatch):
        avg(mu, Fn.zeros(other), 0b01)


def test_averaging_bounds_hold_on_products() -> None:
    mu = gen_product((3, 2, 2), seed=5)
    f = Fn(mu, mu.full, rng_for(5, 99).standard_normal(mu.n_faces))
    records = check_contraction(mu, f, mu.full, 0b011)
    records.append(check_disjoint_avg(mu, f, 0b001, 0b110, 0.0))
    records.append(check_composition(mu, f, 0b011, 0b110, 0.0))
    records.append(check_intersection_avg(mu, f, 0b011, 0b110, 0.0))
    assert all(r.status is Status.PASS for r in records), [r.to_dict() for r in records]


def test_disjoint_avg_needs_disjoint_sets() -> None:
    mu = gen_product((2, 2), seed=1)
    with pytest.raises(InvalidParameter):
        check_disjoint_avg(mu, Fn.zeros(mu), 0b01, 0b11, 0.0)


def test_disjoint_avg_on_correlated_pair_is_tight() -> None:
    eta = 0.3
    mu = gen_eta_correlated(eta)
    f = Fn(mu, 0b01, [1.0, -1.0])
    record = check_disjoint_avg(mu, f, 0b01, 0b10, certify_epsilon(mu).epsilon)
    assert record.status is Status.PASS
    np.testing.assert_allclose(record.lhs, eta**2, rtol=1e-9)


@pytest.mark.parametrize("s,t", [(0b001, 0b010), (0b011, 0b110), (0b101, 0b010), (0b111, 0b001)])
def test_averaging_is_self_adjoint_and_opnorm_symmetric(s: int, t: int) -> None:
    mu = gen_sparse_random((3, 3, 2), 0.6, seed=4)
    rng = rng_for(4, 99)
    f = Fn(mu, s, rng.standard_normal(mu.support_size(s)))
    g = Fn(mu, t, rng.standard_normal(mu.support_size(t)))
    assert math.isclose(inner(avg(mu, f, t), g), inner(f, avg(mu, g, s)), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(opnorm_perp(mu, s, t), opnorm_perp(mu, t, s), rel_tol=1e-12, abs_tol=1e-12)


def test_certificate_only_fills_the_cache_it_is_given() -> None:
    import hdx.core.operators as operators

    assert not [v for v in vars(operators).values() if isinstance(v, SkeletonCache)]
    certify_epsilon(gen_sparse_random((3, 2, 2), 0.7, 11))

    cache = SkeletonCache()
    cert = certify_epsilon(gen_sparse_random((3, 2, 2), 0.7, 12), cache=cache)
    assert cache.size() == len(cert.witnesses)
