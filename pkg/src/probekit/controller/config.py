"""Node and schedule file loaders.

Node file, one node per line::

    # node_id  endpoint          location
    node1      10.0.0.1:22       Singapore
    node2      local             lab

Schedule file, one event per line, or an ``every`` shorthand::

    # offset_s  profile  [spec_ref]
    0.5         utnt     probe-a
    every 1s x 60 docker [spec_ref] [from 10]
"""
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from probekit.clock import exact
from probekit.errors import ConfigError

DEFAULT_PROFILE = "default"
_ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
_EVERY_RE = re.compile(
    r"^every\s+(?P<gap>[0-9.]+)\s*s?\s*[x×*]\s*(?P<count>\d+)"
    r"(?:\s+(?P<profile>(?!from\b)\S+))?(?:\s+(?P<spec>(?!from\b)\S+))?"
    r"(?:\s+from\s+(?P<start>[0-9.]+))?\s*$",
    re.IGNORECASE,
)


class NodeState(str, Enum):
    FREE = "free"
    BUSY = "busy"


@dataclass
class NodeDescriptor:
    node_id: str
    endpoint: str
    location: str = ""
    state: NodeState = NodeState.FREE


@dataclass(frozen=True)
class Event:
    index: int
    offset_s: Fraction
    config_kind: str = DEFAULT_PROFILE
    spec_ref: Optional[str] = None


@dataclass(frozen=True)
class EventSchedule:
    events: tuple = ()

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @classmethod
    def every(cls, gap_s, count, config_kind=DEFAULT_PROFILE, spec_ref=None, start_s=0):
        gap, start = exact(gap_s), exact(start_s)
        return cls(tuple(Event(i, start + i * gap, config_kind, spec_ref) for i in range(count)))


def _strip(line):
    return line.split("#", 1)[0].strip()


def load_node_config(text):
    nodes, seen = [], set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) < 2:
            raise ConfigError("expected '<node_id> <endpoint> [location]'", line=lineno)
        node_id, endpoint = parts[0], parts[1]
        if not _ID_RE.match(node_id):
            raise ConfigError(f"invalid node id {node_id!r}", line=lineno)
        if node_id in seen:
            raise ConfigError(f"duplicate node id {node_id!r}", line=lineno)
        seen.add(node_id)
        nodes.append(NodeDescriptor(node_id, endpoint, parts[2] if len(parts) > 2 else ""))
    if not nodes:
        raise ConfigError("node file lists no nodes")
    return nodes


def _offset(text, lineno):
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"invalid time {text!r}", line=lineno) from None
    if value < 0:
        raise ConfigError(f"negative time {text!r}", line=lineno)
    return value


def load_schedule(text):
    events = []
    last = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.lower().startswith("every"):
            m = _EVERY_RE.match(line)
            if not m:
                raise ConfigError("expected 'every <gap>s x <count> [profile] [spec_ref] [from <t>]'", line=lineno)
            gap = _offset(m["gap"], lineno)
            start = _offset(m["start"], lineno) if m["start"] else Fraction(0)
            new = [(start + i * gap, m["profile"] or DEFAULT_PROFILE, m["spec"]) for i in range(int(m["count"]))]
        else:
            parts = line.split()
            if len(parts) > 3:
                raise ConfigError("expected '<offset_s> [profile] [spec_ref]'", line=lineno)
            new = [(_offset(parts[0], lineno), parts[1] if len(parts) > 1 else DEFAULT_PROFILE,
                    parts[2] if len(parts) > 2 else None)]
        for offset, profile, spec in new:
            if last is not None and offset < last:
                raise ConfigError(f"offset {float(offset)} precedes previous event at {float(last)}", line=lineno)
            last = offset
            events.append(Event(len(events), offset, profile, spec))
    return EventSchedule(tuple(events))
