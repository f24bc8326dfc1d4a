from __future__ import annotations

import json
import logging
import threading
from pathlib import Path
from typing import Dict, Optional

logger = logging.getLogger(__name__)


def skeleton_key(link_key: str, pair: tuple[int, int]) -> str:
    return f"{link_key}|{pair[0]},{pair[1]}"


class SkeletonCache:
    """Second singular values of link skeletons, keyed by complex id and link.

    Entries are reused across certificate requests for the same complex.  With
    a ``path`` the cache is loaded at start-up and persisted on :meth:`flush`.
    """

    def __init__(self, path: Path | None = None) -> None:
        self._path = path
        self._lock = threading.Lock()
        self._entries: Dict[str, Dict[str, float]] = {}
        self._dirty = False
        if self._path is not None:
            self._load()

    def _load(self) -> None:
        if self._path is None or not self._path.exists():
            return
        try:
            data = json.loads(self._path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            logger.warning("Ignoring unreadable skeleton cache %s", self._path)
            return
        for complex_id, payload in data.items():
            if not isinstance(payload, dict):
                continue
            try:
                self._entries[complex_id] = {str(k): float(v) for k, v in payload.items()}
            except (TypeError, ValueError):
                continue

    def _save(self) -> None:
        if self._path is None:
            return
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.write_text(json.dumps(self._entries, indent=2, sort_keys=True), encoding="utf-8")
        except OSError:
            logger.warning("Could not persist skeleton cache to %s", self._path)

    def get(self, complex_id: str, key: str) -> Optional[float]:
        with self._lock:
            return self._entries.get(complex_id, {}).get(key)

    def update(self, complex_id: str, key: str, sigma: float) -> None:
        with self._lock:
            self._entries.setdefault(complex_id, {})[key] = float(sigma)
            self._dirty = True

    def size(self, complex_id: str | None = None) -> int:
        with self._lock:
            if complex_id is None:
                return sum(len(v) for v in self._entries.values())
            return len(self._entries.get(complex_id, {}))

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._dirty = True
            self._save()

    def flush(self) -> None:
        with self._lock:
            if self._dirty:
                self._save()
                self._dirty = False


__all__ = ["SkeletonCache", "skeleton_key"]
