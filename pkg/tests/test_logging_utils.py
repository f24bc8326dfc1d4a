from __future__ import annotations

import logging

from hdx.harness.logging_utils import RunLogBufferHandler, install_run_log_buffer, remove_run_log_buffer


def test_run_buffer_writes_file(tmp_path) -> None:
    handler = RunLogBufferHandler(output_dir=tmp_path, capacity=10)
    handler.setFormatter(logging.Formatter("%(levelname)s:%(message)s"))

    test_logger = logging.getLogger("hdx.test.run")
    original_level = test_logger.level
    test_logger.setLevel(logging.INFO)

    root = logging.getLogger()
    original_root_level = root.level
    root.setLevel(logging.DEBUG)
    root.addHandler(handler)
    try:
        test_logger.info("suite started")
        test_logger.warning("ratio over ceiling")
        handler.flush()
    finally:
        root.removeHandler(handler)
        root.setLevel(original_root_level)
        handler.close()
        test_logger.setLevel(original_level)

    files = list(tmp_path.glob("run_*.log"))
    assert len(files) == 1
    contents = files[0].read_text(encoding="utf-8")
    assert "INFO:suite started" in contents
    assert "WARNING:ratio over ceiling" in contents


def test_buffer_flushes_at_capacity(tmp_path) -> None:
    handler = RunLogBufferHandler(output_dir=tmp_path, capacity=2)
    handler.setFormatter(logging.Formatter("%(message)s"))
    record = logging.LogRecord("hdx", logging.INFO, __file__, 1, "line %d", (1,), None)
    handler.emit(record)
    assert handler.file_path is None
    handler.emit(record)
    assert handler.file_path is not None
    assert handler.file_path.read_text(encoding="utf-8").count("line 1") == 2
    handler.close()


def test_install_and_remove_use_logs_subdirectory(tmp_path) -> None:
    root = logging.getLogger()
    original_root_level = root.level
    root.setLevel(logging.INFO)
    handler = install_run_log_buffer(tmp_path)
    try:
        logging.getLogger("hdx.test.install").info("captured")
    finally:
        path = remove_run_log_buffer(handler)
        root.setLevel(original_root_level)

    assert handler not in root.handlers
    assert path is not None
    assert path.parent == tmp_path / "logs"
    assert "captured" in path.read_text(encoding="utf-8")
