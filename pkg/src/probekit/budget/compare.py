from dataclasses import dataclass

from probekit.budget.cpu import simulate_cpu_budget
from probekit.budget.memory import simulate_memory_budget
from probekit.errors import ConfigError

SIMULATORS = {"memory": simulate_memory_budget, "cpu": simulate_cpu_budget}


@dataclass
class RatioReport:
    resource: str
    counts: dict
    ratios: dict
    runs: dict

    def to_dict(self):
        return {
            "type": "sim",
            "resource": self.resource,
            "counts": dict(self.counts),
            "ratios": {a: dict(row) for a, row in self.ratios.items()},
        }


def compare_profiles(profiles, budget, resource="memory"):
    """Run every profile under ``budget``; ``ratios[a][b]`` is count(a) / count(b)
    (None when count(b) is zero)."""
    profiles = list(profiles.values()) if isinstance(profiles, dict) else list(profiles)
    if not profiles:
        raise ConfigError("no profiles to compare")
    try:
        sim = SIMULATORS[resource]
    except KeyError:
        raise ConfigError(f"unknown resource {resource!r}") from None
    runs = {p.name: sim(p, budget) for p in profiles}
    counts = {name: run.instance_count for name, run in runs.items()}
    ratios = {
        a: {b: (counts[a] / counts[b] if counts[b] else None) for b in counts}
        for a in counts
    }
    return RatioReport(resource, counts, ratios, runs)
