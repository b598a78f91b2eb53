import ipaddress
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from probekit.probe.mpls import MplsLabelEntry, valid_stack

DEFAULT_ATTEMPTS = 3
DEFAULT_GAP_LIMIT = 5


class Method(str, Enum):
    ICMP_ECHO = "icmp-echo"
    UDP = "udp"


class ReplyKind(str, Enum):
    TIME_EXCEEDED = "time-exceeded"
    ECHO_REPLY = "echo-reply"
    DEST_UNREACHABLE = "dest-unreachable"
    TIMEOUT = "timeout"


DESTINATION_KINDS = (ReplyKind.ECHO_REPLY, ReplyKind.DEST_UNREACHABLE)


def check_ipv4(addr):
    try:
        ipaddress.IPv4Address(addr)
    except (ipaddress.AddressValueError, TypeError, ValueError) as exc:
        raise ValueError(f"not a dotted-quad IPv4 address: {addr!r}") from exc
    return addr


@dataclass(frozen=True)
class ProbeSpec:
    target: str
    method: Method = Method.ICMP_ECHO
    max_ttl: int = 30
    attempts_per_hop: int = DEFAULT_ATTEMPTS
    pps: float = 100.0
    gap_limit: int = DEFAULT_GAP_LIMIT
    flow_id: int = 0

    def __post_init__(self):
        check_ipv4(self.target)
        object.__setattr__(self, "method", Method(self.method))
        if not 1 <= self.max_ttl <= 64:
            raise ValueError(f"max_ttl must be in 1..64, got {self.max_ttl}")
        if not 1 <= self.attempts_per_hop <= 5:
            raise ValueError(f"attempts_per_hop must be in 1..5, got {self.attempts_per_hop}")
        if not self.pps > 0:
            raise ValueError(f"pps must be positive, got {self.pps}")
        if self.gap_limit < 1:
            raise ValueError(f"gap_limit must be >= 1, got {self.gap_limit}")
        if not 0 <= self.flow_id <= 0xFFFF:
            raise ValueError(f"flow_id must fit in 16 bits, got {self.flow_id}")


@dataclass(frozen=True)
class HopRecord:
    ttl_sent: int
    reply_kind: ReplyKind
    responder: Optional[str] = None
    rtt_us: Optional[int] = None
    reply_ip_ttl: Optional[int] = None
    labels: tuple = ()
    fingerprint: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "reply_kind", ReplyKind(self.reply_kind))
        object.__setattr__(self, "labels", tuple(self.labels))
        timeout = self.reply_kind is ReplyKind.TIMEOUT
        if timeout != (self.responder is None) or timeout != (self.rtt_us is None):
            raise ValueError("timeout hops have neither responder nor rtt; others have both")
        if self.responder is not None:
            check_ipv4(self.responder)
        if not all(isinstance(e, MplsLabelEntry) for e in self.labels):
            raise TypeError("labels must be MplsLabelEntry values")
        if not valid_stack(self.labels):
            raise ValueError("only the last label entry may carry bottom-of-stack")

    @property
    def responsive(self):
        return self.reply_kind is not ReplyKind.TIMEOUT


@dataclass(frozen=True)
class TraceResult:
    spec: ProbeSpec
    hops: tuple = ()
    destination_reached: bool = False
    started_at: int = 0
    finished_at: int = 0
    error: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        ttls = [h.ttl_sent for h in self.hops]
        if any(b <= a for a, b in zip(ttls, ttls[1:])):
            raise ValueError("hops must be strictly increasing in ttl_sent")
        if self.destination_reached and (
            not self.hops or self.hops[-1].reply_kind not in DESTINATION_KINDS
        ):
            raise ValueError("destination_reached requires a final destination reply")
