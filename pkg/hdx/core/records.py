from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)

# Relative tolerance for identities and slack for explicit-constant bounds.
EXACT_TOLERANCE = 1e-9
# Certified epsilon at or below this counts as an exact product.
EPSILON_FLOOR = 1e-10
# Default O_k ceiling is 2 ** (10 k).
DEFAULT_CEILING_LOG2_PER_K = 10.0


class Status(str, Enum):
    PASS = "PASS"
    REPORT = "REPORT"
    FAIL = "FAIL"

    @property
    def rank(self) -> int:
        return {"FAIL": 0, "REPORT": 1, "PASS": 2}[self.value]


@dataclass(frozen=True)
class CheckRecord:
    """Outcome of one inequality or identity check on one instance."""

    check_id: str
    variant: str
    lhs: float
    rhs_explicit: float
    residual: float
    residual_ratio: float | None
    status: Status
    detail: Mapping[str, Any] = field(default_factory=dict)
    ceiling: float | None = None
    instance: Mapping[str, Any] | None = None
    runtime_ms: float = 0.0

    @property
    def within_ceiling(self) -> bool | None:
        if self.ceiling is None or self.residual_ratio is None:
            return None
        return self.residual_ratio <= self.ceiling

    def with_instance(self, instance: Mapping[str, Any] | None, runtime_ms: float = 0.0) -> "CheckRecord":
        return replace(self, instance=instance, runtime_ms=runtime_ms)

    def sort_key(self) -> tuple:
        instance_key = _canonical(self.instance) if self.instance else ""
        return (self.check_id, instance_key, self.variant, _canonical(self.detail))

    def to_dict(self, *, include_runtime: bool = True) -> dict[str, Any]:
        data: dict[str, Any] = {
            "check_id": self.check_id,
            "variant": self.variant,
            "instance": dict(self.instance) if self.instance else None,
            "detail": dict(self.detail),
            "lhs": _finite_or_text(self.lhs),
            "rhs_explicit": _finite_or_text(self.rhs_explicit),
            "residual": _finite_or_text(self.residual),
            "residual_ratio": _finite_or_text(self.residual_ratio),
            "ceiling": _finite_or_text(self.ceiling),
            "within_ceiling": self.within_ceiling,
            "status": self.status.value,
        }
        if include_runtime:
            data["runtime_ms"] = round(self.runtime_ms, 3)
        return data


def _finite_or_text(value: float | None) -> float | str | None:
    if value is None:
        return None
    value = float(value)
    if math.isfinite(value):
        return value
    return "inf" if value > 0 else ("-inf" if value < 0 else "nan")


def _canonical(mapping: Mapping[str, Any] | None) -> str:
    if not mapping:
        return ""
    return ";".join(f"{key}={mapping[key]}" for key in sorted(mapping))


def ceiling_for(k: int, log2_per_k: float = DEFAULT_CEILING_LOG2_PER_K) -> float:
    return 2.0 ** (log2_per_k * k)


def bound_record(
    check_id: str,
    variant: str,
    lhs: float,
    rhs: float,
    *,
    slack: float = EXACT_TOLERANCE,
    detail: Mapping[str, Any] | None = None,
) -> CheckRecord:
    """Hard check ``lhs <= rhs`` with slack scaled by the magnitude of both sides."""
    lhs, rhs = float(lhs), float(rhs)
    scale = max(1.0, abs(lhs), abs(rhs))
    ok = math.isfinite(lhs) and lhs <= rhs + slack * scale
    if not ok:
        logger.warning("%s/%s failed: lhs=%.6e rhs=%.6e detail=%s", check_id, variant, lhs, rhs, detail)
    return CheckRecord(
        check_id=check_id,
        variant=variant,
        lhs=lhs,
        rhs_explicit=rhs,
        residual=lhs - rhs,
        residual_ratio=None,
        status=Status.PASS if ok else Status.FAIL,
        detail=dict(detail or {}),
    )


def identity_record(
    check_id: str,
    variant: str,
    left: np.ndarray,
    right: np.ndarray,
    *,
    tol: float = EXACT_TOLERANCE,
    detail: Mapping[str, Any] | None = None,
) -> CheckRecord:
    """Exact identity between two value vectors, up to ``tol`` relative."""
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    gap = float(np.max(np.abs(left - right))) if left.size else 0.0
    scale = max(
        1.0,
        float(np.max(np.abs(left))) if left.size else 0.0,
        float(np.max(np.abs(right))) if right.size else 0.0,
    )
    ok = gap <= tol * scale
    if not ok:
        logger.warning("%s/%s identity gap %.3e (scale %.3e) detail=%s", check_id, variant, gap, scale, detail)
    return CheckRecord(
        check_id=check_id,
        variant=variant,
        lhs=gap,
        rhs_explicit=tol * scale,
        residual=gap - tol * scale,
        residual_ratio=gap / scale,
        status=Status.PASS if ok else Status.FAIL,
        detail=dict(detail or {}),
    )


def residual_record(
    check_id: str,
    variant: str,
    lhs: float,
    rhs_explicit: float,
    scale: float,
    epsilon: float,
    *,
    ceiling: float,
    epsilon_floor: float = EPSILON_FLOOR,
    slack: float = EXACT_TOLERANCE,
    detail: Mapping[str, Any] | None = None,
) -> CheckRecord:
    """Check with an unknown O_k term of size ``ceiling * scale``.

    At ``epsilon <= epsilon_floor`` the O_k term vanishes and the explicit part is
    asserted; otherwise the record reports ``(lhs - rhs_explicit) / scale``.
    """
    if epsilon <= epsilon_floor:
        return replace(bound_record(check_id, variant, lhs, rhs_explicit, slack=slack, detail=detail), ceiling=ceiling)
    residual = float(lhs) - float(rhs_explicit)
    if scale > 0:
        ratio = residual / scale
    else:
        ratio = 0.0 if residual <= slack * max(1.0, abs(lhs)) else math.inf
    record = CheckRecord(
        check_id=check_id,
        variant=variant,
        lhs=float(lhs),
        rhs_explicit=float(rhs_explicit),
        residual=residual,
        residual_ratio=ratio,
        status=Status.REPORT,
        detail=dict(detail or {}),
        ceiling=ceiling,
    )
    if record.within_ceiling is False:
        logger.warning("%s/%s residual ratio %.3e exceeds ceiling %.3e", check_id, variant, ratio, ceiling)
    return record


def report_record(
    check_id: str,
    variant: str,
    lhs: float,
    shape: float,
    *,
    ceiling: float,
    detail: Mapping[str, Any] | None = None,
) -> CheckRecord:
    """Pure measurement ``lhs`` against an O_k shape with no explicit part."""
    lhs = float(lhs)
    if shape > 0:
        ratio = lhs / shape
    else:
        ratio = 0.0 if lhs <= EXACT_TOLERANCE else math.inf
    record = CheckRecord(
        check_id=check_id,
        variant=variant,
        lhs=lhs,
        rhs_explicit=0.0,
        residual=lhs,
        residual_ratio=ratio,
        status=Status.REPORT,
        detail=dict(detail or {}),
        ceiling=ceiling,
    )
    if record.within_ceiling is False:
        logger.warning("%s/%s ratio %.3e exceeds ceiling %.3e", check_id, variant, ratio, ceiling)
    return record


__all__ = [
    "EXACT_TOLERANCE",
    "EPSILON_FLOOR",
    "DEFAULT_CEILING_LOG2_PER_K",
    "Status",
    "CheckRecord",
    "ceiling_for",
    "bound_record",
    "identity_record",
    "residual_record",
    "report_record",
]
