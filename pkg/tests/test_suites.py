import pytest

from hdx.core.errors import NotGlobal, UnknownSuite
from hdx.core.records import Status
from hdx.harness.catalog import CATALOG_BY_ID, CatalogEntry, RunContext
from hdx.harness.config_loader import SuiteConfig
from hdx.harness.instances import InstanceStore, control_grid, exact_grid
from hdx.harness.suites import CheckTask, plan_suite, run_suite, run_task
from hdx.harness.timing import CheckTimings


def _small_config(**grids) -> SuiteConfig:
    base = {
        "exact_pairs": 4,
        "exact_sizes": [[2, 2], [2, 2, 2]],
        "product_sizes": [[2, 2]],
        "seeds": [1],
        "degrees": [1],
    }
    base.update(grids)
    return SuiteConfig(grids=base, runtime={"progress": False})


def test_unknown_suite():
    config = _small_config()
    with pytest.raises(UnknownSuite, match="no suite named 'nope'"):
        plan_suite("nope", config)
    with pytest.raises(UnknownSuite):
        run_suite("nope", config)


def test_plan_crosses_checks_and_cases():
    config = _small_config()
    tasks = plan_suite("exact-identities", config)
    assert len(tasks) == 4 * 4
    assert {t.entry.check_id for t in tasks} == {
        "C1-reconstruction",
        "C2-laplacian-equivalence",
        "C3-noise-equivalence",
        "C4-updown-equivalence",
    }
    kinds = [c.spec.kind for c in exact_grid(config)]
    assert kinds == ["product", "eta-correlated", "perturbed-product", "sparse-random"]


def test_exact_identities_pass_and_are_deterministic():
    config = _small_config()
    first = run_suite("exact-identities", config)
    second = run_suite("exact-identities", config)

    assert first.records
    assert not first.failed
    assert all(r.status is Status.PASS for r in first.records)
    assert [r.to_dict(include_runtime=False) for r in first.records] == [
        r.to_dict(include_runtime=False) for r in second.records
    ]
    assert [r.sort_key() for r in first.records] == sorted(r.sort_key() for r in first.records)
    assert all(r.instance is not None for r in first.records)
    assert first.timings.compute_statistics()["C1-reconstruction"]["samples"] == 4


def test_threaded_run_matches_serial():
    serial = run_suite("exact-identities", _small_config())
    threaded_config = _small_config()
    threaded_config.runtime.threads = 4
    threaded = run_suite("exact-identities", threaded_config)
    assert [r.to_dict(include_runtime=False) for r in threaded.records] == [
        r.to_dict(include_runtime=False) for r in serial.records
    ]


def test_product_oracle_has_no_failures():
    result = run_suite("product-oracle", _small_config())
    failures = [r.to_dict() for r in result.records if r.status is Status.FAIL]
    assert not failures, failures


def test_dictator_control_records_the_violation():
    config = _small_config()
    ctx = RunContext(config, InstanceStore(config))
    (case,) = control_grid(config)
    records = run_task(ctx, CheckTask(CATALOG_BY_ID["C18-sse"], case), CheckTimings())
    assert records
    assert all(r.status is Status.PASS for r in records)
    assert all(r.instance["role"] == "control" for r in records)


def test_precondition_failure_becomes_report():
    def refuse(ctx, case):
        raise NotGlobal("delta too large")

    config = _small_config()
    ctx = RunContext(config, InstanceStore(config))
    entry = CatalogEntry("C99-probe", "probe", ("none",), refuse)
    (case,) = control_grid(config)
    timings = CheckTimings()

    (record,) = run_task(ctx, CheckTask(entry, case), timings)
    assert record.status is Status.REPORT
    assert record.variant == "precondition"
    assert record.detail["error"] == "NotGlobal"
    assert timings.compute_statistics()["C99-probe"]["samples"] == 1
