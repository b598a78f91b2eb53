import logging

from probekit.clock import to_micros
from probekit.errors import BackendError, MalformedExtension, OutOfRange
from probekit.probe.fingerprint import infer_initial_ttl
from probekit.probe.model import DESTINATION_KINDS, HopRecord, ReplyKind, TraceResult
from probekit.probe.mpls import parse_icmp_extensions
from probekit.probe.ratelimit import RateLimiter

log = logging.getLogger(__name__)


def hop_from_reply(ttl, reply):
    if reply is None:
        return HopRecord(ttl_sent=ttl, reply_kind=ReplyKind.TIMEOUT)
    try:
        labels = parse_icmp_extensions(reply.extensions)
    except MalformedExtension as exc:
        log.debug("ttl %d: dropping labels from %s: %s", ttl, reply.responder, exc)
        labels = []
    try:
        fingerprint = infer_initial_ttl(reply.reply_ip_ttl, ttl)
    except OutOfRange:
        fingerprint = None
    return HopRecord(
        ttl_sent=ttl,
        reply_kind=reply.kind,
        responder=reply.responder,
        rtt_us=reply.rtt_us,
        reply_ip_ttl=reply.reply_ip_ttl,
        labels=labels,
        fingerprint=fingerprint,
    )


def run_trace(spec, net, clock, shared_limiter=None, on_hop=None):
    """Probe TTL 1..max_ttl towards ``spec.target`` and return the TraceResult.

    Each hop gets up to ``attempts_per_hop`` probes, stopping at the first
    reply. The trace ends at the first destination reply, after
    ``gap_limit`` consecutive silent hops, or at ``max_ttl``. Probes are
    paced at ``spec.pps`` and, when given, by ``shared_limiter`` too.
    A BackendError ends the trace; hops collected so far are kept and
    ``error`` is set.
    """
    steps = trace_steps(spec, net, clock, shared_limiter)
    while True:
        try:
            hop = next(steps)
        except StopIteration as done:
            return done.value
        if on_hop is not None:
            on_hop(hop)


def trace_steps(spec, net, clock, shared_limiter=None):
    """Generator form of :func:`run_trace`: yields each HopRecord as it is
    decided and returns the TraceResult."""
    limiter = RateLimiter(spec.pps)
    started = clock.now()
    hops = []
    reached = False
    silent = 0
    error = None

    for ttl in range(1, spec.max_ttl + 1):
        reply = None
        try:
            for attempt in range(spec.attempts_per_hop):
                t = limiter.acquire(clock.now())
                if shared_limiter is not None:
                    t = shared_limiter.acquire(t)
                    limiter.push_back(t)
                clock.sleep_until(t)
                reply = net.send_probe(spec, ttl, attempt, t)
                if reply is not None:
                    break
        except BackendError as exc:
            error = str(exc) or type(exc).__name__
            break

        hop = hop_from_reply(ttl, reply)
        hops.append(hop)
        yield hop
        if reply is None:
            silent += 1
            if silent >= spec.gap_limit:
                break
        else:
            silent = 0
            if reply.kind in DESTINATION_KINDS:
                reached = True
                break

    return TraceResult(
        spec=spec,
        hops=hops,
        destination_reached=reached,
        started_at=to_micros(started),
        finished_at=to_micros(clock.now()),
        error=error,
    )
