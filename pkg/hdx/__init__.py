"""Efron-Stein calculus and inequality checks on weighted k-partite complexes."""
from __future__ import annotations

from version import __version__

__all__ = ["__version__"]
