from __future__ import annotations

import json
from pathlib import Path

import pytest

from hdx.harness.config_loader import (
    REPORT_CHECKS,
    CeilingConfig,
    SuiteConfig,
    config_hash,
    create_example_config,
    load_config,
)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "config"


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch) -> None:
    for name in ("HDX_CONFIG", "HDX_THREADS", "HDX_OUT_DIR"):
        monkeypatch.delenv(name, raising=False)


def test_frozen_config_matches_defaults() -> None:
    frozen = load_config(CONFIG_DIR / "suite.json")
    assert config_hash(frozen) == config_hash(SuiteConfig())
    example = json.loads((CONFIG_DIR / "suite.example.json").read_text(encoding="utf-8"))
    assert example == create_example_config()


def test_env_overrides(monkeypatch, tmp_path) -> None:
    monkeypatch.setenv("HDX_THREADS", "3")
    monkeypatch.setenv("HDX_OUT_DIR", str(tmp_path / "out"))
    config = load_config()
    assert config.runtime.threads == 3
    assert config.runtime.out_dir == str(tmp_path / "out")

    monkeypatch.setenv("HDX_THREADS", "0")
    assert load_config().runtime.threads == 1


def test_config_path_from_env(monkeypatch, tmp_path) -> None:
    path = tmp_path / "suite.json"
    path.write_text(json.dumps({"grids": {"exact_pairs": 4}}), encoding="utf-8")
    monkeypatch.setenv("HDX_CONFIG", str(path))
    config = load_config()
    assert config.grids.exact_pairs == 4
    assert config.grids.seeds == [1, 2]


def test_missing_file_raises(tmp_path) -> None:
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.json")


def test_partial_sections_are_completed() -> None:
    config = SuiteConfig(ceilings={"default_log2_per_k": 8.0, "per_check": {"C18-sse": 12.0}})
    assert set(REPORT_CHECKS) <= set(config.ceilings.per_check)
    assert config.ceilings.per_check["C17-fourier-concentration"] == 8.0
    assert config.ceilings.ceiling("C18-sse", 2) == 2.0**24
    assert config.ceilings.ceiling("C99-unknown", 2) == 2.0**16


def test_hash_tracks_content() -> None:
    base = SuiteConfig()
    assert config_hash(base) == config_hash(SuiteConfig())
    changed = SuiteConfig(tolerances={"exact": 1e-8})
    assert config_hash(changed) != config_hash(base)
    assert len(config_hash(base)) == 64


def test_default_ceiling() -> None:
    assert CeilingConfig().ceiling("C19-kruskal-katona", 4) == 2.0**40
