"""Node availability and the WAIT / DISCARD admission decision."""
import re
from dataclasses import dataclass
from enum import Enum
from typing import Union

from probekit.controller.config import NodeState


class Policy(str, Enum):
    WAIT = "wait"
    DISCARD = "discard"

    @classmethod
    def parse(cls, text):
        return cls(str(text).lower())


@dataclass(frozen=True)
class CampaignPolicy:
    mode: Policy = Policy.WAIT


@dataclass(frozen=True)
class Assigned:
    node: object


@dataclass(frozen=True)
class Waited:
    until: object
    node: object


@dataclass(frozen=True)
class Discarded:
    pass


Decision = Union[Assigned, Waited, Discarded]


def node_sort_key(node_id):
    """Natural order, so node2 sorts before node10."""
    return tuple((0, int(tok), "") if tok.isdigit() else (1, 0, tok) for tok in re.findall(r"\d+|\D+", node_id))


class NodeRegistry:
    """Tracks when each node becomes free on the campaign timeline."""

    def __init__(self, nodes):
        if not nodes:
            raise ValueError("registry needs at least one node")
        self.nodes = sorted(nodes, key=lambda n: node_sort_key(n.node_id))
        self.busy_until = {n.node_id: None for n in self.nodes}
        self.intervals = {n.node_id: [] for n in self.nodes}

    def is_free(self, node, now):
        until = self.busy_until[node.node_id]
        return until is None or until <= now

    def reserve(self, node, start, end):
        self.busy_until[node.node_id] = end
        self.intervals[node.node_id].append((start, end))

    def refresh_states(self, now):
        for n in self.nodes:
            n.state = NodeState.FREE if self.is_free(n, now) else NodeState.BUSY


def select_node(registry, policy, now):
    """Pick the node for an event arriving at ``now``.

    Free nodes win, lowest id first. Otherwise DISCARD drops the event and
    WAIT binds it to the node that frees first (ties: lowest id). Events are
    offered in arrival order and each binding is reserved before the next
    event is offered, which makes the wait queue FIFO.
    """
    if isinstance(policy, CampaignPolicy):
        policy = policy.mode
    for node in registry.nodes:
        if registry.is_free(node, now):
            return Assigned(node)
    if policy is Policy.DISCARD:
        return Discarded()
    node = min(registry.nodes, key=lambda n: registry.busy_until[n.node_id])
    return Waited(registry.busy_until[node.node_id], node)
