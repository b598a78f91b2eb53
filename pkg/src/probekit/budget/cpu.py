"""Instance packing under a CPU cap."""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from probekit.clock import exact
from probekit.errors import ConfigError


@dataclass(frozen=True)
class CpuSample:
    t: float
    cores_used: float
    utilization: float  # share of all host cores
    instances: int


@dataclass
class CpuRun:
    profile: str
    instance_count: int
    denied_at: Optional[float]
    timeline: list = field(default_factory=list)


def simulate_cpu_budget(profile, budget):
    """Admit instances every ``launch_gap_s`` while the summed sustained demand
    stays within ``cpu_cap_fraction * cores``."""
    demand = exact(profile.cpu_demand_cores)
    if demand <= 0:
        raise ConfigError(f"profile {profile.name}: cpu_demand_cores must be positive, count would be unbounded")
    cap = exact(budget.cpu_cap_fraction) * budget.cores
    gap = exact(budget.launch_gap_s)
    tick = exact(budget.sample_interval_s)
    end = exact(budget.run_duration_s)

    launches = []
    denied_at = None
    t = Fraction(0)
    while len(launches) < budget.max_instances:
        if (len(launches) + 1) * demand > cap:
            denied_at = t
            break
        launches.append(t)
        t += gap

    timeline = []
    s = Fraction(0)
    while s <= end:
        running = sum(1 for x in launches if x <= s)
        used = running * demand
        timeline.append(CpuSample(float(s), float(used), float(used / budget.cores), running))
        s += tick
    return CpuRun(profile.name, len(launches), None if denied_at is None else float(denied_at), timeline)
