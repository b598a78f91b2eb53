import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from probekit.probe.backends import SimHop, SimTopology  # noqa: E402
from probekit.probe.mpls import MplsLabelEntry  # noqa: E402


def random_topology(rng, max_hops=30):
    n = rng.randint(1, max_hops)
    hops = []
    for i in range(n):
        labels = ()
        if i < n - 1 and rng.random() < 0.3:
            depth = rng.randint(1, 3)
            labels = tuple(
                MplsLabelEntry(rng.randrange(1 << 20), rng.randrange(8), d == depth - 1, rng.randrange(256))
                for d in range(depth)
            )
        p = rng.choice([1.0, 1.0, 1.0, 0.0, 0.5])
        hops.append(SimHop(
            address=f"10.{i}.{rng.randrange(256)}.{rng.randrange(1, 255)}",
            latency_us=rng.randrange(0, 20000),
            labels=labels,
            respond_probability=p,
            initial_ttl=rng.choice([32, 64, 128, 255]),
        ))
    return SimTopology(hops, seed=rng.randrange(1 << 30))


@pytest.fixture
def three_hops():
    return SimTopology([
        SimHop("10.0.0.1", latency_us=500),
        SimHop("10.0.1.1", latency_us=1500, labels=(MplsLabelEntry(16, 0, True, 1),)),
        SimHop("1.1.1.1", latency_us=3000, initial_ttl=64),
    ])


@pytest.fixture
def rng():
    return random.Random(1234)
