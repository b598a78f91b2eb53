"""Packets-per-second pacing.

A token bucket of depth one: a permit is granted no earlier than one
interval after the previous permit, and never before the caller's ``now``.
Shareable between threads; permits are handed out under a lock.
"""
import threading
from fractions import Fraction

from probekit.clock import exact


class RateLimiter:
    def __init__(self, pps):
        if pps <= 0:
            raise ValueError(f"pps must be positive, got {pps}")
        self.pps = pps
        self.interval = Fraction(1) / exact(pps)
        self._next = None
        self._lock = threading.Lock()

    def acquire(self, now):
        """Reserve the next send slot at or after ``now``; return its time."""
        with self._lock:
            permitted = now if self._next is None or now >= self._next else self._next
            self._next = permitted + self.interval
            return permitted

    def push_back(self, sent_at):
        """Record that the last permit was actually used at ``sent_at``."""
        with self._lock:
            nxt = sent_at + self.interval
            if self._next is None or nxt > self._next:
                self._next = nxt


def rate_limit_acquire(limiter, now):
    return limiter.acquire(now)
