import json
import logging

import pytest
from click.testing import CliRunner

from hdx.cli import main, parse_subset
from hdx.core.errors import InvalidParameter


@pytest.fixture
def runner():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield CliRunner()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "suite.json"
    path.write_text(
        json.dumps(
            {
                "grids": {"exact_pairs": 4, "exact_sizes": [[2, 2], [2, 2, 2]]},
                "runtime": {"progress": False},
            }
        ),
        encoding="utf-8",
    )
    return path


def test_parse_subset():
    assert parse_subset("") == 0
    assert parse_subset("{}") == 0
    assert parse_subset("1") == 0b001
    assert parse_subset("{1,3}") == 0b101
    with pytest.raises(InvalidParameter):
        parse_subset("0,1")
    with pytest.raises(InvalidParameter):
        parse_subset("a,b")


def test_gen_then_single_computations(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        main, ["--out", str(out), "gen", "--sizes", "2,2,2", "--function", "dictator", "--coord", "1"]
    )
    assert result.exit_code == 0, result.output
    complex_path = out / "complex.json"
    fn_path = out / "complex.fn.json"
    assert complex_path.exists() and fn_path.exists()

    result = runner.invoke(main, ["--out", str(out), "certify", str(complex_path), "--top", "2"])
    assert result.exit_code == 0, result.output
    certificate = json.loads((out / "certificate.json").read_text(encoding="utf-8"))
    assert certificate["epsilon"] <= 1e-10

    result = runner.invoke(main, ["--out", str(out), "decompose", str(complex_path), str(fn_path)])
    assert result.exit_code == 0, result.output
    assert (out / "family.json").exists()

    result = runner.invoke(main, ["--out", str(out), "global", str(complex_path), str(fn_path)])
    assert result.exit_code == 0, result.output
    assert json.loads((out / "global.json").read_text(encoding="utf-8"))["delta_min"] == pytest.approx(1.0)

    result = runner.invoke(main, ["--out", str(out), "walk", str(complex_path), str(fn_path), "--rho", "0.5"])
    assert result.exit_code == 0, result.output
    assert (out / "noise.fn.json").exists()

    result = runner.invoke(
        main, ["--out", str(out), "influence", str(complex_path), str(fn_path), "--subset", "1", "--stdout"]
    )
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert "S,x,I,I_le_d" in lines
    assert any(line.startswith("{1},") for line in lines)


def test_bad_subset_is_a_usage_error(runner, tmp_path):
    out = tmp_path / "out"
    runner.invoke(main, ["--out", str(out), "gen", "--function", "gaussian"])
    result = runner.invoke(
        main,
        ["--out", str(out), "influence", str(out / "complex.json"), str(out / "complex.fn.json"), "--subset", "x"],
    )
    assert result.exit_code == 1
    assert "InvalidParameter" in result.output


def test_check_writes_reports(runner, tmp_path, small_config):
    out = tmp_path / "reports"
    result = runner.invoke(main, ["--config", str(small_config), "--out", str(out), "--quiet", "check", "exact-identities"])
    assert result.exit_code == 0, result.output
    for suffix in (".jsonl", ".csv", ".md"):
        assert (out / f"exact-identities{suffix}").exists()
    assert "exact-identities:" in result.output

    rendered = tmp_path / "rendered"
    result = runner.invoke(
        main, ["--out", str(rendered), "report", str(out / "exact-identities.jsonl"), "--format", "csv"]
    )
    assert result.exit_code == 0, result.output
    assert (rendered / "exact-identities.csv").read_text(encoding="utf-8") == (
        out / "exact-identities.csv"
    ).read_text(encoding="utf-8")


def test_unknown_suite_is_rejected(runner, tmp_path):
    result = runner.invoke(main, ["--out", str(tmp_path), "check", "nope"])
    assert result.exit_code == 2


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(main, ["--config", str(tmp_path / "absent.json"), "check", "default"])
    assert result.exit_code == 1
    assert "Invalid configuration" in result.output
