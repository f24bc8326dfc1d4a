import json
from pathlib import Path

from hdx.harness.catalog import CATALOG, CATALOG_BY_ID, PAIR_MAX_SIZE, catalog_manifest
from hdx.harness.suites import SUITES

MANIFEST = Path(__file__).resolve().parents[1] / "config" / "catalog_manifest.json"


def test_catalog_matches_manifest():
    frozen = json.loads(MANIFEST.read_text(encoding="utf-8"))
    current = [{"check_id": e["check_id"], "title": e["title"]} for e in catalog_manifest()]
    assert current == frozen


def test_catalog_ids_are_numbered_in_order():
    numbers = [int(entry.check_id.split("-", 1)[0][1:]) for entry in CATALOG]
    assert numbers == list(range(1, len(CATALOG) + 1))
    assert len(CATALOG_BY_ID) == len(CATALOG)


def test_every_entry_has_an_anchor():
    for entry in CATALOG:
        assert entry.anchors, entry.check_id
        assert callable(entry.runner)


def test_suites_reference_known_checks():
    for name, plans in SUITES.items():
        for _, check_ids in plans:
            missing = [c for c in check_ids if c not in CATALOG_BY_ID]
            assert not missing, (name, missing)


def test_default_suite_covers_catalog():
    covered = {c for _, check_ids in SUITES["default"] for c in check_ids}
    assert covered == set(CATALOG_BY_ID)


def test_pair_sweep_size():
    assert PAIR_MAX_SIZE == 2
