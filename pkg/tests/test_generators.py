from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError

from hdx.core.errors import InvalidParameter, NegativeWeight, NotGlobal
from hdx.core.generators import (
    FunctionSpec,
    GenSpec,
    gen_perturbed_product,
    gen_product,
    gen_sparse_random,
    random_marginals,
    rng_for,
    scattered_set,
)


def test_streams_are_independent_and_reproducible() -> None:
    a = rng_for(7, 1).standard_normal(5)
    b = rng_for(7, 1).standard_normal(5)
    c = rng_for(7, 2).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    with pytest.raises(InvalidParameter):
        rng_for(-1)


@pytest.mark.parametrize(
    "spec",
    [
        GenSpec(kind="product", sizes=(3, 2), uniform=False, seed=5),
        GenSpec(kind="perturbed-product", sizes=(2, 2, 2), gamma=0.05, seed=5),
        GenSpec(kind="sparse-random", sizes=(3, 3, 2), density=0.6, seed=5),
        GenSpec(kind="eta-correlated", eta=0.2),
    ],
)
def test_specs_rebuild_identically(spec: GenSpec) -> None:
    assert spec.build().complex_id == spec.build().complex_id
    assert spec.label()["kind"] == spec.kind


def test_genspec_validation() -> None:
    with pytest.raises(ValidationError):
        GenSpec(kind="product", sizes=())
    with pytest.raises(ValidationError):
        GenSpec(kind="product", sizes=(2, 0))
    with pytest.raises(ValidationError):
        GenSpec(kind="torus", sizes=(2, 2))
    with pytest.raises(ValidationError):
        GenSpec(kind="eta-correlated", eta=1.0)
    assert GenSpec(kind="eta-correlated", sizes=(4, 4, 4), eta=0.1).sizes == (2, 2)
    assert GenSpec(kind="product", sizes=[2, 3]) == GenSpec(kind="product", sizes=(2, 3))


def test_random_marginals_are_distributions() -> None:
    for marginal in random_marginals((3, 4), seed=2):
        assert np.all(marginal > 0)
        assert np.isclose(marginal.sum(), 1.0)
    mu = gen_product((3, 4), seed=2)
    np.testing.assert_allclose(mu.masses(0b01), random_marginals((3, 4), seed=2)[0])


def test_perturbation_keeps_epsilon_small() -> None:
    small = gen_perturbed_product((2, 2, 2), 0.01, seed=3)
    large = gen_perturbed_product((2, 2, 2), 0.2, seed=3)
    assert 0 < small.certificate.epsilon < large.certificate.epsilon
    with pytest.raises(NegativeWeight):
        gen_perturbed_product((3, 3, 3), 1e6, seed=3)
    with pytest.raises(InvalidParameter):
        gen_perturbed_product((2, 2, 2), -0.1, seed=3)


def test_sparse_random_density_bounds() -> None:
    mu = gen_sparse_random((3, 3), 0.01, seed=1)
    assert mu.n_faces >= 1
    with pytest.raises(InvalidParameter):
        gen_sparse_random((3, 3), 0.0, seed=1)


def test_scattered_set_has_distinct_coordinates() -> None:
    mu = gen_product((6, 6, 6))
    a = scattered_set(mu, 4, seed=9)
    chosen = mu.faces[a.values > 0]
    assert chosen.shape == (4, 3)
    for column in chosen.T:
        assert len(set(column.tolist())) == 4
    with pytest.raises(InvalidParameter):
        scattered_set(mu, 7, seed=9)


def test_function_specs() -> None:
    mu = gen_product((2, 3))
    dictator = FunctionSpec(kind="dictator", coord=1, value=2).build(mu)
    np.testing.assert_array_equal(dictator.values, (mu.faces[:, 1] == 2).astype(float))
    with pytest.raises(InvalidParameter):
        FunctionSpec(kind="dictator", coord=1, value=3).build(mu)
    gaussian = FunctionSpec(kind="gaussian", seed=4)
    np.testing.assert_array_equal(gaussian.build(mu).values, gaussian.build(mu).values)
    assert FunctionSpec(kind="scattered-set", m=2).label() == {"kind": "scattered-set", "seed": 0, "m": 2}
    boolean = FunctionSpec(kind="random-boolean", p=0.5, seed=1).build(mu)
    assert boolean.is_boolean()


def test_global_set_respects_max_delta() -> None:
    mu = gen_product((2, 2))
    spec = FunctionSpec(kind="random-global-set", p=1.0, d=1, max_delta=0.5)
    with pytest.raises(NotGlobal):
        spec.build(mu)
