"""Instance packing under a fixed memory budget."""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from probekit.budget.ksm import KsmState, ksm_step
from probekit.clock import exact
from probekit.errors import ConfigError


@dataclass(frozen=True)
class MemorySample:
    t: float
    memory_mb: float
    instances: int
    booting: int
    merged_pages: float


@dataclass
class MemoryRun:
    profile: str
    instance_count: int
    denied_at: Optional[float]
    timeline: list = field(default_factory=list)

    @property
    def peak_mb(self):
        return max((s.memory_mb for s in self.timeline), default=0.0)

    @property
    def final_mb(self):
        return self.timeline[-1].memory_mb if self.timeline else 0.0


def shareable_pages_per_instance(profile, ksm):
    pages = exact(profile.mem_steady_mb) * 1024 / ksm.page_size_kb
    return int(pages * exact(profile.shareable_page_fraction))


def simulate_memory_budget(profile, budget):
    """Launch instances every ``launch_gap_s`` until one no longer fits.

    A booting instance holds ``mem_peak_mb`` for its boot window, then
    drops to ``mem_steady_mb``, of which merged pages are credited back
    when a KSM model is configured. An instance is admitted only if its
    peak fits on top of the current total. Samples every
    ``sample_interval_s`` up to ``run_duration_s``; launching goes on past
    the sampled window until the first refusal (or ``max_instances``).
    """
    peak, steady = exact(profile.mem_peak_mb), exact(profile.mem_steady_mb)
    if peak <= 0:
        raise ConfigError(f"profile {profile.name}: mem_peak_mb must be positive for a memory budget")
    budget_mb = exact(budget.mem_budget_mb)
    gap = exact(budget.launch_gap_s)
    tick = exact(budget.sample_interval_s)
    end = exact(budget.run_duration_s)
    boot = exact(budget.boot_window_s if budget.boot_window_s is not None else profile.boot_exec_time_s)

    ksm = budget.ksm
    state = None
    per_instance_pages = 0
    page_mb = Fraction(0)
    if ksm is not None:
        state = KsmState.create(0, ksm.scan_rate_pages_per_s, profile.page_volatility)
        per_instance_pages = shareable_pages_per_instance(profile, ksm)
        page_mb = Fraction(ksm.page_size_kb, 1024)

    booting = []  # boot end times, ascending
    n_steady = 0
    admitted = 0
    launching = True
    denied_at = None
    next_launch = Fraction(0)
    next_sample = Fraction(0)
    now = Fraction(0)
    timeline = []

    def usage():
        saved = state.merged_pages * page_mb if state is not None else 0
        return len(booting) * peak + n_steady * steady - saved

    while launching or next_sample <= end:
        candidates = [next_sample] if next_sample <= end else []
        if launching:
            candidates.append(next_launch)
        if booting:
            candidates.append(booting[0])
        t = min(candidates)
        if state is not None:
            state = ksm_step(state, t - now)
        now = t

        while booting and booting[0] <= now:
            booting.pop(0)
            n_steady += 1
            if state is not None:
                state = state.with_pool(n_steady * per_instance_pages)

        if launching and next_launch == now:
            if admitted >= budget.max_instances:
                launching = False
            elif usage() + peak <= budget_mb:
                admitted += 1
                booting.append(now + boot)
                next_launch = now + gap
                continue  # boot == 0 transitions before the next admission
            else:
                launching = False
                denied_at = float(now)

        if next_sample == now:
            timeline.append(MemorySample(
                float(now), float(usage()), admitted, len(booting),
                float(state.merged_pages) if state is not None else 0.0,
            ))
            next_sample += tick

    return MemoryRun(profile.name, admitted, denied_at, timeline)
