"""Report writers: JSONL (header + records), CSV and markdown summaries."""
from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

from hdx.core.errors import InvalidParameter
from hdx.core.records import CheckRecord, Status
from version import __version__

from .schemas import CheckRecordModel, ReportHeader
from .timing import CheckTimings

logger = logging.getLogger(__name__)

FORMATS = ("jsonl", "csv", "markdown")

CSV_COLUMNS = (
    "status",
    "check_id",
    "variant",
    "instance",
    "detail",
    "lhs",
    "rhs_explicit",
    "residual",
    "residual_ratio",
    "ceiling",
    "within_ceiling",
    "runtime_ms",
    "version",
    "config_hash",
)

_SUFFIX = {"jsonl": ".jsonl", "csv": ".csv", "markdown": ".md"}


@dataclass(frozen=True)
class Summary:
    counts: Dict[str, int]
    failures: Tuple[CheckRecord, ...]
    worst_reports: Tuple[CheckRecord, ...]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def exit_code(self) -> int:
        return 2 if self.failures else 0


def summarize(records: Sequence[CheckRecord], worst: int = 10) -> Summary:
    counts = Counter(r.status.value for r in records)
    reports = [r for r in records if r.status is Status.REPORT and r.residual_ratio is not None]
    reports.sort(key=lambda r: (-_ratio_key(r.residual_ratio), r.sort_key()))
    return Summary(
        counts={status.value: counts.get(status.value, 0) for status in Status},
        failures=tuple(r for r in records if r.status is Status.FAIL),
        worst_reports=tuple(reports[:worst]),
    )


def _ratio_key(value: float | None) -> float:
    if value is None or math.isnan(value):
        return -math.inf
    return value


def failures_first(records: Iterable[CheckRecord]) -> List[CheckRecord]:
    return sorted(records, key=lambda r: (r.status.rank, r.sort_key()))


def header_for(suite: str, records: Sequence[CheckRecord], config_hash: str) -> ReportHeader:
    counts = Counter(r.status.value for r in records)
    return ReportHeader(
        suite=suite,
        version=__version__,
        config_hash=config_hash,
        records=len(records),
        counts={status.value: counts.get(status.value, 0) for status in Status},
    )


def write_jsonl(
    path: Path,
    records: Sequence[CheckRecord],
    *,
    suite: str,
    config_hash: str,
    include_runtime: bool = True,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        header = header_for(suite, records, config_hash).model_dump(mode="json")
        handle.write(json.dumps(header, sort_keys=True) + "\n")
        for record in records:
            handle.write(json.dumps(record.to_dict(include_runtime=include_runtime), sort_keys=True) + "\n")
    return path


def read_jsonl(path: Path) -> Tuple[ReportHeader, List[CheckRecord]]:
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        lines = [line for line in handle if line.strip()]
    if not lines:
        raise InvalidParameter(f"{path} has no header line")
    header = ReportHeader.model_validate(json.loads(lines[0]))
    records = [CheckRecordModel.model_validate(json.loads(line)).to_record() for line in lines[1:]]
    return header, records


def _cell(value: Any) -> Any:
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    if value is None:
        return ""
    return value


def write_csv(path: Path, records: Sequence[CheckRecord], *, config_hash: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in failures_first(records):
            row = record.to_dict()
            row["version"] = __version__
            row["config_hash"] = config_hash
            writer.writerow({column: _cell(row.get(column)) for column in CSV_COLUMNS})
    return path


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return f"{value:.4g}"


def render_markdown(
    records: Sequence[CheckRecord],
    *,
    suite: str,
    config_hash: str,
    timings: CheckTimings | None = None,
) -> str:
    summary = summarize(records)
    lines = [
        f"# Check report: {suite}",
        "",
        f"- version: `{__version__}`",
        f"- config hash: `{config_hash}`",
        f"- records: {summary.total}",
        "",
        "## Summary",
        "",
        "| status | count |",
        "|---|---|",
    ]
    lines.extend(f"| {status} | {count} |" for status, count in summary.counts.items())

    if summary.failures:
        lines += ["", "## Failures", ""]
        lines.extend(
            f"- `{r.check_id}` / {r.variant}: lhs={_fmt(r.lhs)} rhs={_fmt(r.rhs_explicit)} {dict(r.detail)}"
            for r in summary.failures
        )
    if summary.worst_reports:
        lines += ["", "## Largest residual ratios", "", "| check | variant | ratio | ceiling |", "|---|---|---|---|"]
        lines.extend(
            f"| {r.check_id} | {r.variant} | {_fmt(r.residual_ratio)} | {_fmt(r.ceiling)} |"
            for r in summary.worst_reports
        )

    lines += [
        "",
        "## Records",
        "",
        "| status | check | variant | detail | lhs | rhs | ratio |",
        "|---|---|---|---|---|---|---|",
    ]
    for r in failures_first(records):
        detail = ", ".join(f"{k}={v}" for k, v in sorted(r.detail.items()))
        lines.append(
            f"| {r.status.value} | {r.check_id} | {r.variant} | {detail} | {_fmt(r.lhs)} | "
            f"{_fmt(r.rhs_explicit)} | {_fmt(r.residual_ratio)} |"
        )

    stats = timings.compute_statistics() if timings is not None else {}
    if stats:
        lines += ["", "## Timing", "", "| check | samples | avg ms | p95 ms | max ms |", "|---|---|---|---|---|"]
        lines.extend(
            f"| {check_id} | {s['samples']} | {s['avg_ms']:.1f} | {s['p95_ms']:.1f} | {s['max_ms']:.1f} |"
            for check_id, s in stats.items()
        )
    return "\n".join(lines) + "\n"


def write_markdown(
    path: Path,
    records: Sequence[CheckRecord],
    *,
    suite: str,
    config_hash: str,
    timings: CheckTimings | None = None,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_markdown(records, suite=suite, config_hash=config_hash, timings=timings), encoding="utf-8")
    return path


def report(
    records: Sequence[CheckRecord],
    fmt: str,
    out_dir: Path,
    *,
    suite: str,
    config_hash: str,
    timings: CheckTimings | None = None,
) -> Path:
    """Write ``records`` in ``fmt`` to ``<out_dir>/<suite>.<ext>``."""
    if fmt not in FORMATS:
        raise InvalidParameter(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
    path = out_dir / f"{suite}{_SUFFIX[fmt]}"
    if fmt == "jsonl":
        written = write_jsonl(path, records, suite=suite, config_hash=config_hash)
    elif fmt == "csv":
        written = write_csv(path, records, config_hash=config_hash)
    else:
        written = write_markdown(path, records, suite=suite, config_hash=config_hash, timings=timings)
    logger.info("Wrote %s report with %d records to %s", fmt, len(records), written)
    return written


__all__ = [
    "FORMATS",
    "CSV_COLUMNS",
    "Summary",
    "summarize",
    "failures_first",
    "header_for",
    "write_jsonl",
    "read_jsonl",
    "write_csv",
    "render_markdown",
    "write_markdown",
    "report",
]
