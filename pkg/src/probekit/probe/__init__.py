"""Traceroute probing with MPLS label-stack revelation and TTL fingerprints."""
from probekit.probe.backends import Reply, SimBackend, SimHop, SimTopology, load_topology
from probekit.probe.fingerprint import INITIAL_TTL_CLASSES, infer_initial_ttl
from probekit.probe.model import HopRecord, Method, ProbeSpec, ReplyKind, TraceResult
from probekit.probe.mpls import (
    MplsLabelEntry,
    build_icmp_extensions,
    decode_mpls_entry,
    encode_mpls_entry,
    parse_icmp_extensions,
)
from probekit.probe.ratelimit import RateLimiter, rate_limit_acquire
from probekit.probe.records import deserialize_result, serialize_result
from probekit.probe.trace import run_trace

__all__ = [
    "HopRecord", "INITIAL_TTL_CLASSES", "Method", "MplsLabelEntry", "ProbeSpec",
    "RateLimiter", "Reply", "ReplyKind", "SimBackend", "SimHop", "SimTopology",
    "TraceResult", "build_icmp_extensions", "decode_mpls_entry", "deserialize_result",
    "encode_mpls_entry", "infer_initial_ttl", "load_topology", "parse_icmp_extensions",
    "rate_limit_acquire", "run_trace", "serialize_result",
]
