"""Clocks used to drive probing and campaigns.

The virtual clock keeps time as :class:`fractions.Fraction` so that pacing
and scheduling arithmetic is exact.
"""
import threading
import time
from fractions import Fraction


def exact(value):
    """Convert ``value`` to a Fraction without binary float noise (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


class VirtualClock:
    """Deterministic clock that only moves when told to."""

    def __init__(self, start=0):
        self._now = exact(start)
        self._lock = threading.Lock()

    def now(self):
        with self._lock:
            return self._now

    def sleep_until(self, t):
        with self._lock:
            if t > self._now:
                self._now = exact(t)

    def advance(self, dt):
        with self._lock:
            self._now += exact(dt)


class WallClock:
    def now(self):
        return time.monotonic()

    def sleep_until(self, t):
        delay = float(t) - time.monotonic()
        if delay > 0:
            time.sleep(delay)

    def advance(self, dt):
        time.sleep(float(dt))


def to_micros(t):
    """Seconds (float or Fraction) to integer microseconds, rounded down."""
    return int(exact(t) * 1_000_000 // 1)
