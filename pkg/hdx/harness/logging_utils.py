from __future__ import annotations

import logging
import sys
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

UTC = timezone.utc

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


class RunLogBufferHandler(logging.Handler):
    """Capture every log line of a suite run and persist it under ``output_dir``.

    Lines are buffered in memory and appended to ``run_<timestamp>.log`` each
    time ``capacity`` lines have accumulated, and once more on close.
    """

    def __init__(self, output_dir: Path, capacity: int = 1000) -> None:
        super().__init__()
        self._output_dir = output_dir
        self._capacity = max(1, capacity)
        self._buffer: list[str] = []
        self._lock = threading.Lock()
        self._closed = False
        self._file_path: Optional[Path] = None

    @property
    def file_path(self) -> Optional[Path]:
        with self._lock:
            return self._file_path

    def emit(self, record: logging.LogRecord) -> None:
        try:
            message = self.format(record)
        except Exception:
            self.handleError(record)
            return
        with self._lock:
            if self._closed:
                return
            self._buffer.append(message)
            if len(self._buffer) >= self._capacity:
                self._flush_locked()

    def flush(self) -> None:
        with self._lock:
            self._flush_locked()

    def close(self) -> None:
        try:
            with self._lock:
                self._flush_locked()
                self._closed = True
        finally:
            super().close()

    def _flush_locked(self) -> Optional[Path]:
        if not self._buffer:
            return None
        self._output_dir.mkdir(parents=True, exist_ok=True)
        if self._file_path is None:
            timestamp = datetime.now(UTC).strftime("%Y%m%dT%H%M%SZ")
            self._file_path = self._output_dir / f"run_{timestamp}.log"
        contents = "\n".join(self._buffer) + "\n"
        self._buffer.clear()
        with self._file_path.open("a", encoding="utf-8") as handle:
            handle.write(contents)
        return self._file_path


def install_run_log_buffer(
    output_dir: Path,
    capacity: int = 2000,
    formatter: logging.Formatter | None = None,
) -> RunLogBufferHandler:
    handler = RunLogBufferHandler(output_dir=output_dir / "logs", capacity=capacity)
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(formatter or logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    logging.getLogger(__name__).info("Run log buffering enabled under %s", output_dir / "logs")
    return handler


def remove_run_log_buffer(handler: RunLogBufferHandler) -> Optional[Path]:
    logging.getLogger().removeHandler(handler)
    handler.close()
    return handler.file_path


def configure_logging(verbose: bool = False) -> None:
    """Console logging on stderr; DEBUG when ``verbose``."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


__all__ = [
    "LOG_FORMAT",
    "RunLogBufferHandler",
    "install_run_log_buffer",
    "remove_run_log_buffer",
    "configure_logging",
]
