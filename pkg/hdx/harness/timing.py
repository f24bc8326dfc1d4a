"""Per-check runtime collection for suite summaries."""
from __future__ import annotations

import logging
import statistics
import threading
from collections import defaultdict
from typing import Any

logger = logging.getLogger(__name__)


class CheckTimings:
    """Thread-safe runtime samples (milliseconds) grouped by check id."""

    def __init__(self) -> None:
        self._samples: dict[str, list[float]] = defaultdict(list)
        self._lock = threading.Lock()

    def add(self, check_id: str, runtime_ms: float) -> None:
        with self._lock:
            self._samples[check_id].append(float(runtime_ms))

    @property
    def total_ms(self) -> float:
        with self._lock:
            return sum(sum(v) for v in self._samples.values())

    def compute_statistics(self) -> dict[str, dict[str, float]]:
        """avg, min, max and p95 per check id."""
        with self._lock:
            snapshot = {k: list(v) for k, v in self._samples.items()}
        stats: dict[str, dict[str, Any]] = {}
        for check_id in sorted(snapshot):
            values = snapshot[check_id]
            if not values:
                continue
            sorted_values = sorted(values)
            p95_idx = int(len(sorted_values) * 0.95)
            stats[check_id] = {
                "avg_ms": statistics.mean(values),
                "min_ms": sorted_values[0],
                "max_ms": sorted_values[-1],
                "p95_ms": sorted_values[min(p95_idx, len(sorted_values) - 1)],
                "samples": len(values),
            }
        return stats

    def clear(self) -> None:
        with self._lock:
            self._samples.clear()
        logger.debug("Check timings cleared")


__all__ = ["CheckTimings"]
