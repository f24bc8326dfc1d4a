from __future__ import annotations

import math
import re
import unittest

import numpy as np
import pytest

from hdx.core import subsets
from hdx.core.decomposition import (
    ApproxESWitness,
    EfronSteinFamily,
    check_junta_orthogonality,
    check_near_orthogonality,
    check_parseval,
    check_strong_parseval,
    es_all,
    es_component,
    exact_witness,
    high_degree,
    idempotence_defect,
    l4_closeness_defect,
    low_degree,
    low_degree_family,
    natural_laplacian_family,
    parseval_defect,
    validate_approx_es,
    witness_accepts,
    with_parameters,
)
from hdx.core.errors import DomainMismatch, InvalidParameter, MissingWitness
from hdx.core.generators import (
    gen_perturbed_product,
    gen_product,
    gen_sparse_random,
    perturb_family,
    random_low_degree,
    rng_for,
)
from hdx.core.measure_space import Fn, inner, lift, norm2
from hdx.core.records import Status


def _gaussian(mu, seed: int) -> Fn:
    return Fn(mu, mu.full, rng_for(seed, 77).standard_normal(mu.n_faces))


class ProductDecompositionTests(unittest.TestCase):
    def setUp(self) -> None:
        self.mu = gen_product((3, 2, 2), seed=11)
        self.f = _gaussian(self.mu, 1)
        self.g = _gaussian(self.mu, 2)
        self.family = es_all(self.mu, self.f)

    def test_family_is_complete_and_reduced(self) -> None:
        self.assertTrue(self.family.complete)
        for s, comp in self.family.components.items():
            self.assertEqual(comp.home, s)

    def test_reconstruction(self) -> None:
        np.testing.assert_allclose(self.family.reconstruct().values, self.f.values, atol=1e-12)

    def test_components_are_orthogonal(self) -> None:
        for s in range(1 << self.mu.k):
            for t in range(s + 1, 1 << self.mu.k):
                value = inner(lift(self.family[s]), lift(self.family[t]))
                self.assertLess(abs(value), 1e-12, (s, t))

    def test_parseval_is_exact(self) -> None:
        self.assertLess(parseval_defect(self.mu, self.f, self.g), 1e-12)
        record = check_parseval(self.mu, self.f, self.g, 0.0)
        self.assertIs(record.status, Status.PASS)
        junta = lift(es_component(self.mu, self.f, 0b001) + 1.0)
        self.assertIs(check_parseval(self.mu, junta, self.g, 0.0, junta=0b001).status, Status.PASS)

    def test_idempotence(self) -> None:
        self.assertLess(idempotence_defect(self.mu, self.f, 0b011, 0b011), 1e-12)
        self.assertLess(idempotence_defect(self.mu, self.f, 0b011, 0b001), 1e-12)

    def test_degree_split(self) -> None:
        total = low_degree(self.family, 1) + high_degree(self.family, 2)
        np.testing.assert_allclose(total.values, self.f.values, atol=1e-12)

    def test_random_low_degree_has_no_high_part(self) -> None:
        h = random_low_degree(self.mu, 1, seed=3)
        family = es_all(self.mu, h)
        self.assertLess(norm2(high_degree(family, 2)), 1e-10)

    def test_exact_witness_parameters(self) -> None:
        witness = exact_witness(self.family, self.f)
        params = validate_approx_es(self.mu, self.f, witness)
        self.assertAlmostEqual(params.alpha, norm2(self.f))
        self.assertLess(params.eps_prime, 1e-12)
        self.assertGreaterEqual(params.beta, float(np.max(np.abs(self.f.values))))
        self.assertFalse(witness_accepts(witness, params))
        self.assertTrue(witness_accepts(with_parameters(witness, params), params))

    def test_strong_parseval_with_exact_families(self) -> None:
        wf = exact_witness(self.family, self.f)
        wg = exact_witness(es_all(self.mu, self.g), self.g)
        record = check_strong_parseval(self.mu, self.f, self.g, wf, wg, 0.0)
        self.assertIs(record.status, Status.PASS)

    def test_perturbed_family_moves_eps_prime(self) -> None:
        witness = exact_witness(self.family, self.f)
        moved = perturb_family(witness, 0.01, seed=5)
        again = perturb_family(witness, 0.01, seed=5)
        params = validate_approx_es(self.mu, self.f, moved)
        self.assertGreater(params.eps_prime, 1e-4)
        for s in self.family.components:
            np.testing.assert_array_equal(moved.family[s].values, again.family[s].values)
        with self.assertRaises(InvalidParameter):
            perturb_family(witness, -1.0, seed=5)

    def test_l4_closeness_of_identical_families(self) -> None:
        witness = exact_witness(self.family, self.f)
        result = l4_closeness_defect(self.mu, self.f, witness, witness, 0b011, 0.0)
        self.assertEqual(result.lhs[:3], (0.0, 0.0, 0.0))
        self.assertLess(result.lhs[3], 1e-40)


def test_reconstruction_on_sparse_support() -> None:
    mu = gen_sparse_random((3, 3, 2), 0.6, seed=7)
    f = _gaussian(mu, 3)
    family = es_all(mu, f, threads=3)
    np.testing.assert_allclose(family.reconstruct().values, f.values, atol=1e-10)
    serial = es_all(mu, f)
    for s in family.components:
        np.testing.assert_array_equal(family[s].values, serial[s].values)


def test_near_orthogonality_on_perturbed_product() -> None:
    product = gen_perturbed_product((2, 2, 2), 0.05, seed=2)
    mu, eps = product.complex, product.certificate.epsilon
    f, g = _gaussian(mu, 1), _gaussian(mu, 2)
    for s in range(1, 1 << mu.k):
        for t in range(1, 1 << mu.k):
            if s != t:
                assert check_near_orthogonality(mu, f, g, s, t, eps).status is Status.PASS
    with pytest.raises(InvalidParameter):
        check_near_orthogonality(mu, f, g, 1, 1, eps)


def test_junta_orthogonality_requires_s_outside_t() -> None:
    mu = gen_product((2, 2, 2), seed=1)
    f = _gaussian(mu, 1)
    junta = Fn(mu, 0b011, rng_for(4, 1).standard_normal(mu.support_size(0b011)))
    assert check_junta_orthogonality(mu, f, junta, 0b100, 0.0).status is Status.PASS
    assert check_junta_orthogonality(mu, f, junta, 0b101, 0.0).status is Status.PASS
    with pytest.raises(InvalidParameter):
        check_junta_orthogonality(mu, f, junta, 0b001, 0.0)


def test_missing_witness_and_bad_homes() -> None:
    mu = gen_product((2, 2), seed=1)
    f = _gaussian(mu, 1)
    family = es_all(mu, f)
    partial = ApproxESWitness(family, {0: f})
    with pytest.raises(MissingWitness, match=re.escape(subsets.fmt(0b11))):
        validate_approx_es(mu, f, partial)
    with pytest.raises(DomainMismatch):
        EfronSteinFamily(mu, {0b01: family[0b10]})


def test_laplacian_and_low_degree_families() -> None:
    mu = gen_product((2, 2, 2), seed=3)
    f = _gaussian(mu, 1)
    natural = natural_laplacian_family(mu, f, 0b001)
    assert sorted(natural.family.components) == [1, 3, 5, 7]
    low = low_degree_family(mu, f, 1)
    assert sorted(low.family.components) == [0, 1, 2, 4]
    params = validate_approx_es(mu, low_degree(es_all(mu, f), 1), low)
    assert math.isfinite(params.beta)
