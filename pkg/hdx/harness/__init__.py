"""Check catalog, suites and reports built on :mod:`hdx.core`."""
from __future__ import annotations

from .config_loader import SuiteConfig, config_hash, load_config

__all__ = [
    "SuiteConfig",
    "load_config",
    "config_hash",
    "run_suite",
    "CATALOG",
]

_LAZY = {
    "run_suite": "suites",
    "CATALOG": "catalog",
}


def __getattr__(name: str):
    module = _LAZY.get(name)
    if module is not None:
        from importlib import import_module

        return getattr(import_module(f"{__name__}.{module}"), name)
    raise AttributeError(f"module 'hdx.harness' has no attribute {name!r}")
