"""Per-configuration resource profiles and budgets."""
from dataclasses import dataclass, fields
from importlib import resources
from typing import Optional

import yaml

from probekit.errors import ConfigError


@dataclass(frozen=True)
class ResourceProfile:
    name: str
    image_size_mb: float = 0.0
    deploy_time_s: float = 0.0
    boot_exec_time_s: float = 0.0
    mem_peak_mb: float = 0.0
    mem_steady_mb: float = 0.0
    shareable_page_fraction: float = 0.0
    page_volatility: float = 0.0
    cpu_demand_cores: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if f.name != "name" and getattr(self, f.name) < 0:
                raise ConfigError(f"profile {self.name}: {f.name} must be >= 0")
        if self.mem_steady_mb > self.mem_peak_mb:
            raise ConfigError(f"profile {self.name}: mem_steady_mb exceeds mem_peak_mb")
        for name in ("shareable_page_fraction", "page_volatility"):
            if getattr(self, name) > 1:
                raise ConfigError(f"profile {self.name}: {name} must be in [0, 1]")

    @property
    def total_time_s(self):
        return self.deploy_time_s + self.boot_exec_time_s


@dataclass(frozen=True)
class KsmModel:
    scan_rate_pages_per_s: float = 5000.0  # 100 pages per 20 ms wake-up
    page_size_kb: int = 4

    def __post_init__(self):
        if self.scan_rate_pages_per_s < 0:
            raise ConfigError("KSM scan rate must be >= 0")
        if self.page_size_kb <= 0:
            raise ConfigError("KSM page size must be positive")


@dataclass(frozen=True)
class BudgetConfig:
    mem_budget_mb: float = 1024.0
    cpu_cap_fraction: float = 0.25
    cores: int = 16
    launch_gap_s: float = 0.1
    run_duration_s: float = 60.0
    ksm: Optional[KsmModel] = None
    # Overrides each profile's boot_exec_time_s as the time spent at peak memory.
    boot_window_s: Optional[float] = None
    sample_interval_s: float = 0.1
    max_instances: int = 100_000

    def __post_init__(self):
        if not 0 < self.cpu_cap_fraction <= 1:
            raise ConfigError("cpu_cap_fraction must be in (0, 1]")
        if self.launch_gap_s < 0:
            raise ConfigError("launch_gap_s must be >= 0")
        if self.mem_budget_mb < 0 or self.cores <= 0 or self.run_duration_s < 0:
            raise ConfigError("budget quantities must be positive")
        if self.sample_interval_s <= 0:
            raise ConfigError("sample_interval_s must be positive")


PROFILE_KEYS = {f.name for f in fields(ResourceProfile)} - {"name"}


def profiles_from_dict(doc):
    if not isinstance(doc, dict) or not isinstance(doc.get("profiles"), dict) or not doc["profiles"]:
        raise ConfigError("profiles file must contain a non-empty 'profiles' mapping")
    out = {}
    for name, values in doc["profiles"].items():
        values = values or {}
        unknown = set(values) - PROFILE_KEYS
        if unknown:
            raise ConfigError(f"profile {name}: unknown keys {sorted(unknown)}")
        try:
            out[str(name)] = ResourceProfile(name=str(name), **{k: float(v) for k, v in values.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"profile {name}: {exc}") from exc
    return out


def load_profiles(path=None):
    """Load profiles from a YAML file, or the bundled defaults when ``path`` is None."""
    if path is None:
        text = resources.files("probekit.data").joinpath("profiles.yaml").read_text()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = getattr(getattr(exc, "problem_mark", None), "line", None)
        raise ConfigError(f"invalid YAML: {exc}", line=None if line is None else line + 1) from exc
    return profiles_from_dict(doc)
