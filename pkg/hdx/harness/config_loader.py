"""Configuration loader for the check harness.

Loads the suite configuration (tolerances, O_k ceilings, instance grids and
runtime settings) from a JSON file with environment variable overrides.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from hdx.core.records import DEFAULT_CEILING_LOG2_PER_K, EPSILON_FLOOR, EXACT_TOLERANCE, ceiling_for

REPORT_CHECKS = (
    "C14-influence-bounds",
    "C15-product-hypercontractivity",
    "C16-hdx-hypercontractivity",
    "C17-fourier-concentration",
    "C18-sse",
    "C19-kruskal-katona",
    "C20-l4-closeness",
    "C21-derivative-family",
)


@dataclass
class ToleranceConfig:
    """Status thresholds."""
    exact: float = EXACT_TOLERANCE
    slack: float = EXACT_TOLERANCE
    epsilon_floor: float = EPSILON_FLOOR


@dataclass
class CeilingConfig:
    """O_k ceilings as ``log2(ceiling) / k`` per check id."""
    default_log2_per_k: float = DEFAULT_CEILING_LOG2_PER_K
    per_check: dict[str, float] = field(default_factory=lambda: {c: DEFAULT_CEILING_LOG2_PER_K for c in REPORT_CHECKS})

    def ceiling(self, check_id: str, k: int) -> float:
        return ceiling_for(k, self.per_check.get(check_id, self.default_log2_per_k))


@dataclass
class GridConfig:
    """Instance sweep grids."""
    etas: list[float] = field(default_factory=lambda: [0.01, 0.02, 0.05, 0.1])
    gammas: list[float] = field(default_factory=lambda: [0.02, 0.05])
    perturbed_sizes: list[list[int]] = field(default_factory=lambda: [[2, 2, 2], [3, 2, 2]])
    product_sizes: list[list[int]] = field(
        default_factory=lambda: [[2, 2], [3, 2], [2, 2, 2], [3, 3, 2], [2, 2, 2, 2]]
    )
    exact_sizes: list[list[int]] = field(
        default_factory=lambda: [[2, 3], [3, 3, 2], [2, 2, 2, 2], [2, 2, 2, 2, 2]]
    )
    exact_pairs: int = 50
    sparse_density: float = 0.6
    seeds: list[int] = field(default_factory=lambda: [1, 2])
    degrees: list[int] = field(default_factory=lambda: [1, 2])
    rhos: list[float] = field(default_factory=lambda: [0.5])
    global_sizes: list[int] = field(default_factory=lambda: [6, 6, 6])
    global_p: list[float] = field(default_factory=lambda: [0.05, 0.1])
    kk_sizes: list[int] = field(default_factory=lambda: [35, 35, 35, 35])
    kk_set_size: int = 20
    kk_seeds: list[int] = field(default_factory=lambda: list(range(1, 11)))
    perturbation_zeta: float = 0.01


@dataclass
class RuntimeConfig:
    """Execution settings."""
    threads: int = 1
    out_dir: str = "hdx_out"
    progress: bool = True
    certify_max_faces: int = 20000
    skeleton_cache: str | None = None


@dataclass
class SuiteConfig:
    """Complete harness configuration."""
    tolerances: ToleranceConfig = None
    ceilings: CeilingConfig = None
    grids: GridConfig = None
    runtime: RuntimeConfig = None

    def __post_init__(self):
        if self.tolerances is None or isinstance(self.tolerances, dict):
            self.tolerances = ToleranceConfig() if self.tolerances is None else ToleranceConfig(**self.tolerances)
        if self.ceilings is None or isinstance(self.ceilings, dict):
            self.ceilings = CeilingConfig() if self.ceilings is None else CeilingConfig(**self.ceilings)
        if self.grids is None or isinstance(self.grids, dict):
            self.grids = GridConfig() if self.grids is None else GridConfig(**self.grids)
        if self.runtime is None or isinstance(self.runtime, dict):
            self.runtime = RuntimeConfig() if self.runtime is None else RuntimeConfig(**self.runtime)
        missing = [c for c in REPORT_CHECKS if c not in self.ceilings.per_check]
        for check_id in missing:
            self.ceilings.per_check[check_id] = self.ceilings.default_log2_per_k


def _nested_set(data: dict[str, Any], path: str, value: Any) -> None:
    """Set nested dictionary value using dot notation."""
    keys = path.split(".")
    for key in keys[:-1]:
        if key not in data:
            data[key] = {}
        data = data[key]
    data[keys[-1]] = value


def load_config(config_path: str | Path | None = None) -> SuiteConfig:
    """Load configuration from JSON file with environment overrides.

    Args:
        config_path: Path to JSON config file. If None, ``HDX_CONFIG`` is
            consulted, then built-in defaults are used.

    Raises:
        FileNotFoundError: If config file specified but not found.
        json.JSONDecodeError: If config file is invalid JSON.
    """
    config_dict: dict[str, Any] = {}

    config_path = config_path or os.environ.get("HDX_CONFIG") or None
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        with open(path, "r", encoding="utf-8") as f:
            config_dict = json.load(f)

    threads_env = os.environ.get("HDX_THREADS", "").strip()
    if threads_env:
        _nested_set(config_dict, "runtime.threads", max(1, int(threads_env)))
    out_env = os.environ.get("HDX_OUT_DIR", "").strip()
    if out_env:
        _nested_set(config_dict, "runtime.out_dir", out_env)

    return SuiteConfig(**config_dict)


def config_hash(config: SuiteConfig) -> str:
    """SHA-256 of the canonical JSON form of the configuration."""
    payload = json.dumps(asdict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def create_example_config() -> dict[str, Any]:
    """Create example configuration dictionary for suite.example.json."""
    return asdict(SuiteConfig())


if __name__ == "__main__":
    import sys

    if len(sys.argv) > 1 and sys.argv[1] == "generate-example":
        example = create_example_config()
        output_path = Path("config/suite.example.json")
        output_path.parent.mkdir(exist_ok=True)

        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(example, f, indent=2)
            f.write("\n")

        print(f"Generated example config: {output_path}")
    else:
        config = load_config()
        print(f"Threads: {config.runtime.threads}")
        print(f"Output: {config.runtime.out_dir}")
        print(f"Config hash: {config_hash(config)}")
