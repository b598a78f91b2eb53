"""Behavioral model of a same-page merging scanner.

``merged`` pages each free one page frame. Per step of length ``dt``,
merged pages are first re-dirtied (a ``volatility`` fraction per second)
and then the scanner merges up to ``scan_rate * dt`` further pages, never
exceeding the shareable pool::

    merged' = min(merged * (1 - volatility*dt) + scan_rate*dt, shareable)

Starting from zero the merged count only grows, towards
``min(shareable, scan_rate / volatility)``.
"""
from dataclasses import dataclass, replace
from fractions import Fraction

from probekit.clock import exact


@dataclass(frozen=True)
class KsmState:
    shareable_pages: Fraction = Fraction(0)
    merged_pages: Fraction = Fraction(0)
    scan_rate: Fraction = Fraction(0)
    volatility: Fraction = Fraction(0)

    @classmethod
    def create(cls, shareable_pages=0, scan_rate=0, volatility=0, merged_pages=0):
        return cls(exact(shareable_pages), exact(merged_pages), exact(scan_rate), exact(volatility))

    def with_pool(self, shareable_pages):
        return replace(self, shareable_pages=exact(shareable_pages))


def ksm_step(state, dt):
    dt = exact(dt)
    if dt <= 0:
        return state
    kept = state.merged_pages * max(Fraction(0), 1 - state.volatility * dt)
    merged = min(kept + state.scan_rate * dt, state.shareable_pages)
    return replace(state, merged_pages=merged)


def steady_merged_pages(shareable_pages, scan_rate, volatility):
    shareable_pages, scan_rate, volatility = exact(shareable_pages), exact(scan_rate), exact(volatility)
    if volatility == 0:
        return shareable_pages if scan_rate > 0 else Fraction(0)
    return min(shareable_pages, scan_rate / volatility)


def time_to_full_merge(shareable_pages, scan_rate):
    """Exact convergence time with zero volatility."""
    return exact(shareable_pages) / exact(scan_rate)
