"""Network backends and the deterministic simulated network."""
import json
import random
import threading
from dataclasses import dataclass, field
from typing import Optional, Protocol

from probekit.errors import ConfigError
from probekit.probe.model import Method, ReplyKind, check_ipv4
from probekit.probe.mpls import MplsLabelEntry, build_icmp_extensions, valid_stack


@dataclass(frozen=True)
class Reply:
    responder: str
    kind: ReplyKind
    rtt_us: int
    reply_ip_ttl: int
    extensions: bytes = b""


class NetworkBackend(Protocol):
    def send_probe(self, spec, ttl, attempt, send_time) -> Optional[Reply]:
        """Send one probe and return its reply, or None on timeout."""

    def close(self) -> None: ...


@dataclass(frozen=True)
class SimHop:
    address: str
    latency_us: int = 1000
    labels: tuple = ()
    respond_probability: float = 1.0
    initial_ttl: int = 255
    # Raw extension bytes sent instead of the encoded label stack.
    extension_override: Optional[bytes] = None

    def __post_init__(self):
        check_ipv4(self.address)
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.latency_us < 0:
            raise ValueError("latency must be >= 0")
        if not 0.0 <= self.respond_probability <= 1.0:
            raise ValueError("respond_probability must be in [0, 1]")
        if not valid_stack(self.labels):
            raise ValueError("only the last label entry may carry bottom-of-stack")


@dataclass(frozen=True)
class SimTopology:
    """A fixed path; the last hop is the destination host."""

    hops: tuple
    destination: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        if not self.hops:
            raise ValueError("a topology needs at least one hop")
        if self.destination is None:
            object.__setattr__(self, "destination", self.hops[-1].address)
        elif self.destination != self.hops[-1].address:
            raise ValueError("destination must be the address of the last hop")

    def __len__(self):
        return len(self.hops)

    def hop_for_ttl(self, ttl):
        """Return (1-based position, hop) reached by a probe with ``ttl``."""
        pos = min(ttl, len(self.hops))
        return pos, self.hops[pos - 1]

    def responds(self, ttl, attempt, flow_id=0):
        _, hop = self.hop_for_ttl(ttl)
        p = hop.respond_probability
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        return random.Random(f"{self.seed}:{flow_id}:{ttl}:{attempt}").random() < p

    def round_trip_us(self, position):
        return 2 * sum(h.latency_us for h in self.hops[:position])


class SimBackend:
    """Replays a SimTopology. Replies are instantaneous on the probing clock;
    the round trip is reported, not waited out, as an asynchronous prober would."""

    def __init__(self, topology):
        self.topology = topology
        self.sent = []
        self._lock = threading.Lock()

    def send_probe(self, spec, ttl, attempt, send_time):
        with self._lock:
            self.sent.append((send_time, ttl, attempt))
        topo = self.topology
        if not topo.responds(ttl, attempt, spec.flow_id):
            return None
        pos, hop = topo.hop_for_ttl(ttl)
        reply_ttl = max(hop.initial_ttl - (pos - 1), 0)
        if pos == len(topo):
            kind = ReplyKind.ECHO_REPLY if spec.method is Method.ICMP_ECHO else ReplyKind.DEST_UNREACHABLE
            ext = b""
        else:
            kind = ReplyKind.TIME_EXCEEDED
            ext = hop.extension_override if hop.extension_override is not None else build_icmp_extensions(hop.labels)
        return Reply(hop.address, kind, topo.round_trip_us(pos), reply_ttl, ext)

    def close(self):
        pass


def _label_from_obj(obj, where):
    if isinstance(obj, dict):
        return MplsLabelEntry(
            label=int(obj["label"]),
            tc=int(obj.get("tc", 0)),
            bottom_of_stack=bool(obj.get("bos", obj.get("bottom_of_stack", False))),
            ttl=int(obj.get("ttl", 0)),
        )
    if isinstance(obj, (list, tuple)) and len(obj) == 4:
        label, tc, bos, ttl = obj
        return MplsLabelEntry(int(label), int(tc), bool(bos), int(ttl))
    raise ConfigError(f"{where}: label entry must be an object or [label, tc, bos, ttl]")


def topology_from_dict(doc):
    try:
        hops = []
        for i, h in enumerate(doc["hops"], start=1):
            labels = [_label_from_obj(e, f"hop {i}") for e in h.get("labels", [])]
            hops.append(SimHop(
                address=h["address"],
                latency_us=int(h.get("latency_us", 1000)),
                labels=labels,
                respond_probability=float(h.get("respond_probability", 1.0)),
                initial_ttl=int(h.get("initial_ttl", 255)),
            ))
        return SimTopology(hops, destination=doc.get("destination"), seed=int(doc.get("seed", 0)))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid topology: {exc}") from exc


def topology_to_dict(topo):
    return {
        "destination": topo.destination,
        "seed": topo.seed,
        "hops": [
            {
                "address": h.address,
                "latency_us": h.latency_us,
                "labels": [list(e.as_tuple()) for e in h.labels],
                "respond_probability": h.respond_probability,
                "initial_ttl": h.initial_ttl,
            }
            for h in topo.hops
        ],
    }


def load_topology(path):
    """Read a JSON topology file: ``{"destination", "seed", "hops": [...]}``."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc.msg}", line=exc.lineno) from exc
    return topology_from_dict(doc)
