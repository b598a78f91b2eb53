"""Fixed-budget instance packing with a page-merging model."""
from probekit.budget.compare import RatioReport, compare_profiles
from probekit.budget.cpu import simulate_cpu_budget
from probekit.budget.ksm import KsmState, ksm_step, steady_merged_pages, time_to_full_merge
from probekit.budget.memory import simulate_memory_budget
from probekit.budget.profiles import BudgetConfig, KsmModel, ResourceProfile, load_profiles

__all__ = [
    "BudgetConfig", "KsmModel", "KsmState", "RatioReport", "ResourceProfile", "compare_profiles",
    "ksm_step", "load_profiles", "simulate_cpu_budget", "simulate_memory_budget",
    "steady_merged_pages", "time_to_full_merge",
]
