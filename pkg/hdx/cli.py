"""Command-line interface: instance generation, single computations and check suites."""
from __future__ import annotations

import csv
import functools
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from hdx.core import subsets
from hdx.core.calculus import globalness, influence_profile
from hdx.core.decomposition import es_all
from hdx.core.errors import HdxError, InvalidParameter
from hdx.core.generators import FunctionSpec, GenSpec
from hdx.core.operators import certify_epsilon
from hdx.core.skeleton_cache import SkeletonCache
from hdx.core.walks import check_kk, noise_direct, updown
from hdx.harness.config_loader import SuiteConfig, config_hash, load_config
from hdx.harness.logging_utils import configure_logging, install_run_log_buffer, remove_run_log_buffer
from hdx.harness.report import FORMATS, read_jsonl, report, summarize
from hdx.harness.schemas import (
    CertificateFile,
    FamilyFile,
    GlobalnessFile,
    load_complex,
    load_function,
    save_complex,
    save_function,
    write_json,
)
from hdx.harness.suites import SUITES, run_suite

logger = logging.getLogger(__name__)


@dataclass
class CliState:
    config: SuiteConfig
    seed: int

    @property
    def out_dir(self) -> Path:
        return Path(self.config.runtime.out_dir)

    @property
    def threads(self) -> int:
        return max(1, self.config.runtime.threads)

    def skeleton_cache(self) -> SkeletonCache | None:
        path = self.config.runtime.skeleton_cache
        return SkeletonCache(Path(path)) if path else None


def _surface_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (HdxError, FileNotFoundError, ValidationError, json.JSONDecodeError) as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


def parse_subset(text: str) -> int:
    """``"1,3"`` (1-based) -> bitmask; ``""`` and ``"{}"`` are the empty set."""
    cleaned = text.strip().strip("{}").strip()
    if not cleaned:
        return 0
    try:
        coords = [int(part) for part in cleaned.split(",")]
    except ValueError as exc:
        raise InvalidParameter(f"cannot parse subset {text!r}") from exc
    if any(c < 1 for c in coords):
        raise InvalidParameter(f"subset coordinates are 1-based, got {text!r}")
    return subsets.mask_from(c - 1 for c in coords)


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise InvalidParameter(f"cannot parse part sizes {text!r}") from exc


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="64-bit seed for generated instances")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Suite config JSON")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@click.option("--threads", type=int, default=None, help="Worker threads (overrides config)")
@click.option("--verbose", "-v", is_flag=True, default=False, help="DEBUG logging")
@click.option("--quiet", is_flag=True, default=False, help="Disable progress bars")
@click.pass_context
def main(ctx: click.Context, seed: int, config_path: str | None, out_dir: str | None, threads: int | None,
         verbose: bool, quiet: bool):
    """Efron-Stein calculus on weighted k-partite epsilon-product complexes."""
    load_dotenv()
    configure_logging(verbose)
    try:
        config = load_config(config_path)
    except (FileNotFoundError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise click.ClickException(f"Invalid configuration: {exc}") from exc
    if threads is not None:
        config.runtime.threads = max(1, threads)
    if out_dir is not None:
        config.runtime.out_dir = out_dir
    if quiet:
        config.runtime.progress = False
    ctx.obj = CliState(config, seed)


@main.command()
@click.option(
    "--kind",
    type=click.Choice(["product", "eta-correlated", "perturbed-product", "sparse-random"]),
    default="product",
    show_default=True,
)
@click.option("--sizes", default="2,2", show_default=True, help="Part sizes, comma separated")
@click.option("--eta", type=float, default=0.0, show_default=True)
@click.option("--gamma", type=float, default=0.0, show_default=True)
@click.option("--density", type=float, default=1.0, show_default=True)
@click.option("--random-marginals", is_flag=True, default=False, help="Seeded random base marginals")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="GenSpec JSON (overrides the flags above)")
@click.option(
    "--function",
    "function_kind",
    type=click.Choice(
        ["dictator", "random-low-degree", "random-global-set", "random-boolean", "gaussian", "scattered-set"]
    ),
    default=None,
    help="Also generate a function of this kind",
)
@click.option("--coord", type=int, default=1, show_default=True, help="Dictator coordinate (1-based)")
@click.option("--value", type=int, default=1, show_default=True, help="Dictator value index")
@click.option("--degree", "-d", type=int, default=1, show_default=True)
@click.option("--p", type=float, default=0.1, show_default=True)
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--max-delta", type=float, default=None)
@click.option("--name", default="complex", show_default=True, help="Output file stem")
@click.pass_obj
@_surface_errors
def gen(state: CliState, kind: str, sizes: str, eta: float, gamma: float, density: float, random_marginals: bool,
        spec_path: str | None, function_kind: str | None, coord: int, value: int, degree: int, p: float, m: int,
        max_delta: float | None, name: str):
    """Generate a complex (and optionally a function on it)."""
    if spec_path:
        spec = GenSpec.model_validate_json(Path(spec_path).read_text(encoding="utf-8"))
    else:
        spec = GenSpec(
            kind=kind,
            sizes=_parse_sizes(sizes),
            eta=eta,
            gamma=gamma,
            density=density,
            uniform=not random_marginals,
            seed=state.seed,
        )
    mu = spec.build(threads=state.threads)
    path = save_complex(state.out_dir / f"{name}.json", mu, spec.label())
    click.echo(f"complex {mu.complex_id}: k={mu.k} faces={mu.n_faces} -> {path}")
    if function_kind:
        fspec = FunctionSpec(
            kind=function_kind,
            coord=coord - 1,
            value=value,
            d=degree,
            p=p,
            m=m,
            max_delta=max_delta,
            seed=state.seed,
        )
        f = fspec.build(mu)
        fn_path = save_function(state.out_dir / f"{name}.fn.json", f, fspec.label())
        click.echo(f"function {function_kind} -> {fn_path}")


@main.command()
@click.argument("complex_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--top", type=int, default=None, help="Print the n largest witnesses")
@click.pass_obj
@_surface_errors
def certify(state: CliState, complex_path: str, top: int | None):
    """Certify epsilon: largest link skeleton second singular value."""
    mu = load_complex(Path(complex_path))
    cache = state.skeleton_cache()
    cert = certify_epsilon(mu, threads=state.threads, cache=cache)
    if cache is not None:
        cache.flush()
    path = write_json(state.out_dir / "certificate.json", CertificateFile.from_certificate(cert))
    click.echo(f"epsilon = {cert.epsilon:.12g} ({len(cert.witnesses)} witnesses) -> {path}")
    for witness in cert.top(top or 0):
        link = subsets.fmt(witness.link.subset)
        click.echo(f"  link {link}={list(witness.link.values)} pair {witness.pair}: sigma={witness.sigma:.12g}")


@main.command()
@click.argument("complex_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("function_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
@_surface_errors
def decompose(state: CliState, complex_path: str, function_path: str):
    """Write every Efron-Stein component f^{=S}."""
    mu = load_complex(Path(complex_path))
    f = load_function(Path(function_path), mu)
    family = es_all(mu, f, threads=state.threads)
    path = write_json(state.out_dir / "family.json", FamilyFile.from_family(family))
    click.echo(f"{len(family.components)} components -> {path}")


@main.command()
@click.argument("complex_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("function_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--subset", "subset_texts", multiple=True, help="1-based subset, e.g. 1,3 (default: all |S| <= d)")
@click.option("--degree", "-d", type=int, default=1, show_default=True)
@click.option("--stdout", "to_stdout", is_flag=True, default=False, help="Write CSV to stdout")
@click.pass_obj
@_surface_errors
def influence(state: CliState, complex_path: str, function_path: str, subset_texts: tuple[str, ...], degree: int,
              to_stdout: bool):
    """Influence profiles I_{S,x} and I^{<=d}_{S,x} as CSV."""
    mu = load_complex(Path(complex_path))
    f = load_function(Path(function_path), mu)
    chosen = [subsets.validate(parse_subset(t), mu.k) for t in subset_texts] or subsets.by_size(mu.k, degree)
    family = es_all(mu, f, threads=state.threads)

    def emit(handle) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["S", "x", "I", "I_le_d"])
        for s in chosen:
            writer.writerows(influence_profile(mu, f, s, degree, family).rows())

    if to_stdout:
        emit(sys.stdout)
        return
    path = state.out_dir / "influence.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        emit(handle)
    click.echo(f"{len(chosen)} influence profiles -> {path}")


@main.command(name="global")
@click.argument("complex_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("function_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--degree", "-d", type=int, default=1, show_default=True)
@click.pass_obj
@_surface_errors
def global_(state: CliState, complex_path: str, function_path: str, degree: int):
    """Minimal delta for which f is (d, delta)-global."""
    mu = load_complex(Path(complex_path))
    f = load_function(Path(function_path), mu)
    result = globalness(mu, f, degree)
    path = write_json(state.out_dir / "global.json", GlobalnessFile.from_report(mu, result))
    click.echo(f"delta_min(d={degree}) = {result.delta_min:.12g} at {result.witness_point.encode()} -> {path}")


@main.command()
@click.argument("complex_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("function_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--rho", type=float, default=0.5, show_default=True)
@click.option("--op", type=click.Choice(["noise", "updown"]), default="noise", show_default=True)
@click.pass_obj
@_surface_errors
def walk(state: CliState, complex_path: str, function_path: str, rho: float, op: str):
    """Apply the noise operator T_rho or the up-down walk T."""
    mu = load_complex(Path(complex_path))
    f = load_function(Path(function_path), mu)
    out = noise_direct(mu, f, rho) if op == "noise" else updown(mu, f)
    label = {"op": op, "rho": rho} if op == "noise" else {"op": op}
    path = save_function(state.out_dir / f"{op}.fn.json", out, label)
    click.echo(f"{op} applied -> {path}")


@main.command()
@click.argument("complex_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("function_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--degree", "-d", type=int, default=1, show_default=True)
@click.option("--delta", type=float, default=None, help="Globalness to assume (default: measured delta_min)")
@click.option("--epsilon", type=float, default=None, help="Skip certification and use this epsilon")
@click.option("--strict/--no-strict", default=True, show_default=True, help="Raise when preconditions fail")
@click.pass_obj
@_surface_errors
def kk(state: CliState, complex_path: str, function_path: str, degree: int, delta: float | None,
       epsilon: float | None, strict: bool):
    """Shadow bound for a global set A (Kruskal-Katona type)."""
    mu = load_complex(Path(complex_path))
    a = load_function(Path(function_path), mu)
    if delta is None:
        delta = globalness(mu, a, degree).delta_min
    if epsilon is None:
        cache = state.skeleton_cache()
        epsilon = certify_epsilon(mu, threads=state.threads, cache=cache).epsilon
        if cache is not None:
            cache.flush()
    records = check_kk(
        mu,
        a,
        degree,
        delta,
        epsilon,
        ceiling=state.config.ceilings.ceiling("C19-kruskal-katona", mu.k),
        epsilon_floor=state.config.tolerances.epsilon_floor,
        strict=strict,
        threads=state.threads,
    )
    path = write_json(state.out_dir / "kk.json", [r.to_dict(include_runtime=False) for r in records])
    for record in records:
        click.echo(f"{record.status.value:6} {record.variant}: lhs={record.lhs:.6g} rhs={record.rhs_explicit:.6g}")
    click.echo(f"-> {path}")


@main.command()
@click.argument("suite", type=click.Choice(sorted(SUITES)))
@click.pass_context
def check(ctx: click.Context, suite: str):
    """Run a check suite; exit code 2 iff any FAIL."""
    state: CliState = ctx.obj
    out_dir = state.out_dir
    handler = install_run_log_buffer(out_dir)
    try:
        result = run_suite(suite, state.config)
        digest = config_hash(state.config)
        for fmt in FORMATS:
            report(result.records, fmt, out_dir, suite=suite, config_hash=digest, timings=result.timings)
    except HdxError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    finally:
        remove_run_log_buffer(handler)

    summary = summarize(result.records)
    counts = " ".join(f"{status}={count}" for status, count in summary.counts.items())
    click.echo(f"{suite}: {summary.total} records ({counts})")
    for record in summary.failures:
        click.echo(f"  FAIL {record.check_id}/{record.variant} {dict(record.detail)}")
    for check_id, stats in result.timings.compute_statistics().items():
        click.echo(f"  {check_id}: {stats['samples']} tasks, avg {stats['avg_ms']:.1f} ms, p95 {stats['p95_ms']:.1f} ms")
    ctx.exit(summary.exit_code)


@main.command(name="report")
@click.argument("jsonl_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="markdown", show_default=True)
@click.pass_obj
@_surface_errors
def report_(state: CliState, jsonl_path: str, fmt: str):
    """Re-render a JSONL report as csv, markdown or canonical jsonl."""
    header, records = read_jsonl(Path(jsonl_path))
    path = report(records, fmt, state.out_dir, suite=header.suite, config_hash=header.config_hash)
    click.echo(f"{len(records)} records -> {path}")


if __name__ == "__main__":
    main()
