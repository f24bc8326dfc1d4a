"""Named suites: which catalog entries run on which instance grids."""
from __future__ import annotations

import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from tqdm import tqdm

from hdx.core.errors import HdxError, UnknownSuite
from hdx.core.records import CheckRecord, Status

from .catalog import CATALOG_BY_ID, CatalogEntry, RunContext
from .config_loader import SuiteConfig
from .instances import GRIDS, Case, InstanceStore
from .timing import CheckTimings

logger = logging.getLogger(__name__)

_EXACT = ("C1-reconstruction", "C2-laplacian-equivalence", "C3-noise-equivalence", "C4-updown-equivalence")
_BOUNDS = (
    "C5-contraction",
    "C6-disjoint-avg",
    "C7-composition",
    "C8-near-orthogonality",
    "C9-approx-parseval",
    "C10-idempotence",
    "C11-junta-orthogonality",
    "C12-strong-parseval",
    "C13-global-component",
    "C14-influence-bounds",
)
_DECOMPOSITIONS = ("C20-l4-closeness", "C21-derivative-family")

# suite -> ((grid, check ids), ...)
SUITES: Dict[str, Tuple[Tuple[str, Tuple[str, ...]], ...]] = {
    "exact-identities": (("exact", _EXACT),),
    "product-oracle": (
        (
            "product",
            _BOUNDS + ("C15-product-hypercontractivity", "C16-hdx-hypercontractivity") + _DECOMPOSITIONS,
        ),
    ),
    "eps-sweep": (("eps", _BOUNDS + ("C16-hdx-hypercontractivity", "C18-sse") + _DECOMPOSITIONS),),
    "applications": (
        ("global-set", ("C17-fourier-concentration", "C18-sse")),
        ("control", ("C18-sse",)),
        ("kk", ("C19-kruskal-katona",)),
    ),
}
SUITES["default"] = tuple(
    plan for name in ("exact-identities", "product-oracle", "eps-sweep", "applications") for plan in SUITES[name]
)


@dataclass(frozen=True)
class CheckTask:
    entry: CatalogEntry
    case: Case


@dataclass
class SuiteResult:
    name: str
    records: List[CheckRecord]
    timings: CheckTimings = field(default_factory=CheckTimings)

    @property
    def failed(self) -> bool:
        return any(r.status is Status.FAIL for r in self.records)


def plan_suite(name: str, config: SuiteConfig) -> List[CheckTask]:
    if name not in SUITES:
        raise UnknownSuite(f"no suite named {name!r}; known: {', '.join(sorted(SUITES))}")
    tasks = []
    for grid_name, check_ids in SUITES[name]:
        cases = GRIDS[grid_name](config)
        for check_id in check_ids:
            entry = CATALOG_BY_ID[check_id]
            tasks.extend(CheckTask(entry, case) for case in cases)
    return tasks


def _precondition_record(task: CheckTask, exc: HdxError) -> CheckRecord:
    logger.info("%s precondition failed on %s: %s", task.entry.check_id, task.case.label(), exc)
    return CheckRecord(
        check_id=task.entry.check_id,
        variant="precondition",
        lhs=float("nan"),
        rhs_explicit=float("nan"),
        residual=float("nan"),
        residual_ratio=None,
        status=Status.REPORT,
        detail={"error": type(exc).__name__, "message": str(exc)},
    )


def run_task(ctx: RunContext, task: CheckTask, timings: CheckTimings) -> List[CheckRecord]:
    started = time.perf_counter()
    try:
        records = task.entry.runner(ctx, task.case)
    except HdxError as exc:
        records = [_precondition_record(task, exc)]
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    timings.add(task.entry.check_id, elapsed_ms)
    share = elapsed_ms / max(1, len(records))
    label = task.case.label()
    return [r.with_instance(label, share) for r in records]


def run_suite(name: str, config: SuiteConfig, *, progress: bool | None = None) -> SuiteResult:
    """Run every task of suite ``name`` and return canonically sorted records."""
    tasks = plan_suite(name, config)
    store = InstanceStore(config)
    ctx = RunContext(config, store)
    timings = CheckTimings()
    threads = max(1, config.runtime.threads)
    show = config.runtime.progress if progress is None else progress
    logger.info("Running suite %s: %d tasks on %d thread(s)", name, len(tasks), threads)

    bar = tqdm(total=len(tasks), desc=name, unit="check", disable=not show or not sys.stderr.isatty())
    collected: List[CheckRecord] = []
    try:
        if threads > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(run_task, ctx, task, timings) for task in tasks]
                for future in futures:
                    collected.extend(future.result())
                    bar.update(1)
        else:
            for task in tasks:
                collected.extend(run_task(ctx, task, timings))
                bar.update(1)
    finally:
        bar.close()
        store.flush()

    collected.sort(key=lambda r: r.sort_key())
    failures = sum(1 for r in collected if r.status is Status.FAIL)
    logger.info("Suite %s finished: %d records, %d FAIL", name, len(collected), failures)
    return SuiteResult(name, collected, timings)


__all__ = ["SUITES", "CheckTask", "SuiteResult", "plan_suite", "run_task", "run_suite"]
