import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from probekit.budget import (
    BudgetConfig, KsmModel, KsmState, ResourceProfile, compare_profiles, ksm_step, load_profiles,
    simulate_cpu_budget, simulate_memory_budget, steady_merged_pages, time_to_full_merge,
)
from probekit.errors import ConfigError


def mem_profile(name, peak, steady=None, boot=30.0, share=0.5, vol=0.0):
    return ResourceProfile(name, mem_peak_mb=peak, mem_steady_mb=peak if steady is None else steady,
                           boot_exec_time_s=boot, shareable_page_fraction=share, page_volatility=vol)


def floor_div(a, b):
    # decimal strings keep 57.6 exact
    return math.floor(Fraction(str(a)) / Fraction(str(b)))


# KSM


def test_scan_rate_zero_no_change():
    s = KsmState.create(shareable_pages=10_000, scan_rate=0, volatility=0)
    assert ksm_step(s, Fraction(1, 10)) == s


def test_single_step_arithmetic():
    s = KsmState.create(shareable_pages=10_000, scan_rate=1000)
    assert ksm_step(s, Fraction(1, 10)).merged_pages == 100


def test_full_merge_fixed_point():
    s = KsmState.create(shareable_pages=5_000, scan_rate=1000)
    for _ in range(200):
        s = ksm_step(s, Fraction(1, 10))
    assert s.merged_pages == 5_000


def test_volatility_fixed_point():
    s = KsmState.create(shareable_pages=10_000, scan_rate=100, volatility=Fraction(1, 10))
    prev = s.merged_pages
    for _ in range(3000):
        s = ksm_step(s, Fraction(1, 10))
        assert s.merged_pages >= prev
        prev = s.merged_pages
    assert abs(s.merged_pages - steady_merged_pages(10_000, 100, Fraction(1, 10))) < 1
    assert steady_merged_pages(10_000, 100, Fraction(1, 10)) == 1000
    assert steady_merged_pages(500, 100, Fraction(1, 10)) == 500


@given(st.integers(0, 10**6), st.integers(0, 10**5), st.fractions(0, 1, max_denominator=100),
       st.fractions(Fraction(1, 100), Fraction(1, 2), max_denominator=100))
def test_step_stays_within_pool(pool, scan, vol, dt):
    s = KsmState.create(pool, scan, vol)
    for _ in range(5):
        s2 = ksm_step(s, dt)
        assert 0 <= s2.merged_pages <= pool
        assert s2.merged_pages >= s.merged_pages
        s = s2


# memory budget


def test_peak_ratio_counts():
    budget = BudgetConfig(mem_budget_mb=1024, launch_gap_s=0.1, run_duration_s=20)
    counts = [simulate_memory_budget(mem_profile(n, p), budget).instance_count
              for n, p in (("u", 8), ("d", 57.6), ("v", 256))]
    assert counts == [floor_div(1024, 8), floor_div(1024, 57.6), floor_div(1024, 256)] == [128, 17, 4]


def test_peak_above_budget():
    assert simulate_memory_budget(mem_profile("big", 2048), BudgetConfig()).instance_count == 0


def test_zero_peak_rejected():
    with pytest.raises(ConfigError):
        simulate_memory_budget(mem_profile("z", 0), BudgetConfig())


def test_ksm_does_not_change_count_but_lowers_steady_memory():
    p = mem_profile("u", 8, steady=6, boot=15.0, share=0.6)
    plain = BudgetConfig(run_duration_s=60)
    dedup = BudgetConfig(run_duration_s=60, ksm=KsmModel(scan_rate_pages_per_s=2000))
    a, b = simulate_memory_budget(p, plain), simulate_memory_budget(p, dedup)
    assert a.instance_count == b.instance_count == 128
    assert b.final_mb < a.final_mb
    assert a.final_mb == 128 * 6
    # first instance settles at t=15; the pool (921 pages per settled instance,
    # one instance per 0.1 s) outgrows a 2000 pages/s scanner, so merging is
    # scan-limited until t=60
    assert b.timeline[-1].merged_pages == 2000 * 45
    assert b.peak_mb == a.peak_mb


def test_boot_window_lets_more_in():
    p = mem_profile("u", 10, steady=5, boot=0.5)
    short = simulate_memory_budget(p, BudgetConfig(mem_budget_mb=100, run_duration_s=10))
    long_ = simulate_memory_budget(p, BudgetConfig(mem_budget_mb=100, run_duration_s=10, boot_window_s=100))
    assert long_.instance_count == 10
    assert short.instance_count > long_.instance_count


def test_timeline_sampling():
    run = simulate_memory_budget(mem_profile("u", 100), BudgetConfig(mem_budget_mb=1024, run_duration_s=2))
    assert [s.t for s in run.timeline][:3] == [0.0, 0.1, 0.2]
    assert len(run.timeline) == 21
    assert run.timeline[-1].instances == 10


profiles_st = st.builds(
    lambda peak, frac, share, vol, boot: mem_profile("p", peak, steady=peak * frac, boot=boot, share=share, vol=vol),
    st.integers(1, 300), st.sampled_from([0.25, 0.5, 1.0]), st.sampled_from([0.0, 0.3, 0.9]),
    st.sampled_from([0.0, 0.1, 0.9]), st.sampled_from([0.0, 0.5, 3.0]),
)


@settings(max_examples=60, deadline=None)
@given(profiles_st, st.integers(0, 2048), st.sampled_from([0.0, 0.05, 0.1, 0.5]),
       st.sampled_from([None, 500, 50_000]))
def test_timeline_never_exceeds_budget(p, budget_mb, gap, scan):
    ksm = KsmModel(scan) if scan is not None else None
    run = simulate_memory_budget(p, BudgetConfig(mem_budget_mb=budget_mb, launch_gap_s=gap, run_duration_s=5, ksm=ksm))
    assert all(s.memory_mb <= budget_mb + 1e-9 for s in run.timeline)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.integers(0, 50), st.integers(0, 2048), st.integers(0, 512))
def test_count_monotone(peak, extra, budget_mb, more):
    b1 = BudgetConfig(mem_budget_mb=budget_mb, run_duration_s=5)
    b2 = BudgetConfig(mem_budget_mb=budget_mb + more, run_duration_s=5)
    c = simulate_memory_budget(mem_profile("p", peak), b1).instance_count
    assert simulate_memory_budget(mem_profile("p", peak + extra), b1).instance_count <= c
    assert simulate_memory_budget(mem_profile("p", peak), b2).instance_count >= c


@pytest.mark.parametrize("gap", [0, 0.1, 1, 1000])
def test_gap_irrelevant_without_overlap(gap):
    p = mem_profile("p", 57.6, boot=2.0)
    run = simulate_memory_budget(p, BudgetConfig(launch_gap_s=gap, run_duration_s=50_000, sample_interval_s=1000))
    assert run.instance_count == 17


# cpu budget


@pytest.mark.parametrize("demand, expected", [(0.05, 80), (0.15, 26), (4.0, 1), (4.5, 0)])
def test_cpu_counts(demand, expected):
    run = simulate_cpu_budget(ResourceProfile("p", cpu_demand_cores=demand),
                              BudgetConfig(cpu_cap_fraction=0.25, cores=16, run_duration_s=10))
    assert run.instance_count == floor_div(4, demand) == expected
    assert max(s.cores_used for s in run.timeline) <= 4


def test_cpu_zero_demand():
    with pytest.raises(ConfigError):
        simulate_cpu_budget(ResourceProfile("p"), BudgetConfig())


def test_cpu_timeline_ramps():
    run = simulate_cpu_budget(ResourceProfile("p", cpu_demand_cores=1.0), BudgetConfig(run_duration_s=1))
    assert [s.instances for s in run.timeline[:6]] == [1, 2, 3, 4, 4, 4]
    assert run.timeline[5].utilization == 0.25


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 400), st.integers(1, 100), st.integers(1, 100), st.integers(1, 64))
def test_cpu_monotone(demand_centi, extra, cap_pct, cores):
    def count(d, pct):
        return simulate_cpu_budget(ResourceProfile("p", cpu_demand_cores=d / 100),
                                   BudgetConfig(cpu_cap_fraction=pct / 100, cores=cores, run_duration_s=1000,
                                                sample_interval_s=1000)).instance_count
    c = count(demand_centi, cap_pct)
    assert c == (cap_pct * cores) // demand_centi
    assert count(demand_centi + extra, cap_pct) <= c
    assert count(demand_centi, min(100, cap_pct + extra)) >= c


# comparison


def test_single_profile_ratio():
    r = compare_profiles([mem_profile("only", 8)], BudgetConfig(run_duration_s=1))
    assert r.ratios == {"only": {"only": 1.0}}


def test_empty_profiles():
    with pytest.raises(ConfigError):
        compare_profiles([], BudgetConfig())


def test_zero_count_ratio_is_none():
    r = compare_profiles([mem_profile("a", 8), mem_profile("b", 4096)], BudgetConfig(run_duration_s=1))
    assert r.ratios["a"]["b"] is None
    assert r.ratios["b"]["a"] == 0


def test_bundled_profiles_ratios():
    ps = load_profiles()
    assert set(ps) == {"utnt", "docker", "vagrant"}
    u, d, v = ps["utnt"], ps["docker"], ps["vagrant"]
    assert d.mem_steady_mb / u.mem_steady_mb == pytest.approx(7.2)
    assert v.mem_steady_mb / u.mem_steady_mb == pytest.approx(32)
    assert d.total_time_s / u.total_time_s == pytest.approx(5)
    assert v.total_time_s / u.total_time_s == pytest.approx(65)
    assert d.image_size_mb / u.image_size_mb == pytest.approx(430)
    assert v.image_size_mb / u.image_size_mb == pytest.approx(1170)
    assert v.boot_exec_time_s / u.boot_exec_time_s == pytest.approx(7.5)
    merged = u.mem_steady_mb * (1 - u.shareable_page_fraction)
    assert d.mem_steady_mb / merged == pytest.approx(17, rel=0.05)
    assert v.mem_steady_mb / merged == pytest.approx(74, rel=0.05)
    cpu = compare_profiles(ps, BudgetConfig(run_duration_s=1), "cpu")
    assert cpu.counts == {"utnt": 80, "docker": 26, "vagrant": 1}


def test_bad_profiles_file(tmp_path):
    path = tmp_path / "p.yaml"
    path.write_text("profiles:\n  a:\n    mem_peak_mb: 1\n    mem_steady_mb: 2\n")
    with pytest.raises(ConfigError):
        load_profiles(path)
    path.write_text("profiles:\n  a:\n    bogus: 1\n")
    with pytest.raises(ConfigError):
        load_profiles(path)
    path.write_text("profiles: [\n")
    with pytest.raises(ConfigError):
        load_profiles(path)
