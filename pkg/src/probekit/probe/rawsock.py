"""Raw-socket IPv4 backend (needs CAP_NET_RAW; Linux only).

Probes within one trace keep the same flow identifiers so that per-flow
load balancers keep them on one path: ICMP echo probes share the ICMP id
(= flow_id), UDP probes share source and destination ports. Individual
probes are told apart by the echo sequence number (ICMP) or by the UDP
payload length (UDP).
"""
import os
import select
import socket
import struct
import time
from dataclasses import dataclass
from typing import Optional

from probekit.errors import BackendError
from probekit.probe.backends import Reply
from probekit.probe.model import Method, ReplyKind
from probekit.probe.mpls import inet_checksum

ICMP_ECHO_REPLY = 0
ICMP_DEST_UNREACH = 3
ICMP_ECHO = 8
ICMP_TIME_EXCEEDED = 11
UDP_DPORT = 33435
# Original-datagram length assumed when the ICMP length field is zero.
LEGACY_ORIGINAL_LEN = 128


def probe_seq(ttl, attempt):
    return (ttl << 3) | attempt


def udp_payload_len(ttl, attempt):
    return 2 + probe_seq(ttl, attempt)


def build_echo(ident, seq):
    header = struct.pack("!BBHHH", ICMP_ECHO, 0, 0, ident, seq)
    csum = inet_checksum(header)
    return struct.pack("!BBHHH", ICMP_ECHO, 0, csum, ident, seq)


@dataclass(frozen=True)
class IcmpMessage:
    source: str
    ip_ttl: int
    icmp_type: int
    code: int
    ident: Optional[int] = None
    seq: Optional[int] = None
    quoted_proto: Optional[int] = None
    quoted_len: Optional[int] = None
    quoted_sport: Optional[int] = None
    quoted_dport: Optional[int] = None
    extensions: bytes = b""


def parse_icmp_packet(data):
    """Decode an IPv4 datagram carrying ICMP, as read from a raw socket.

    Returns None for anything that is not a well-formed ICMP message.
    """
    if len(data) < 20:
        return None
    ihl = (data[0] & 0x0F) * 4
    if data[0] >> 4 != 4 or len(data) < ihl + 8 or data[9] != socket.IPPROTO_ICMP:
        return None
    ip_ttl = data[8]
    source = socket.inet_ntoa(data[12:16])
    icmp = data[ihl:]
    icmp_type, code = icmp[0], icmp[1]
    if icmp_type == ICMP_ECHO_REPLY:
        ident, seq = struct.unpack("!HH", icmp[4:8])
        return IcmpMessage(source, ip_ttl, icmp_type, code, ident=ident, seq=seq)
    if icmp_type not in (ICMP_TIME_EXCEEDED, ICMP_DEST_UNREACH):
        return IcmpMessage(source, ip_ttl, icmp_type, code)

    body = icmp[8:]
    words = icmp[5]
    if words:
        orig_len = words * 4
        extensions = body[orig_len:] if len(body) > orig_len else b""
    elif len(body) > LEGACY_ORIGINAL_LEN:
        orig_len = LEGACY_ORIGINAL_LEN
        extensions = body[orig_len:]
    else:
        orig_len = len(body)
        extensions = b""
    quoted = body[:orig_len]
    if len(quoted) < 28:
        return IcmpMessage(source, ip_ttl, icmp_type, code, extensions=extensions)
    qihl = (quoted[0] & 0x0F) * 4
    qproto = quoted[9]
    (qlen,) = struct.unpack("!H", quoted[2:4])
    inner = quoted[qihl:qihl + 8]
    msg = dict(quoted_proto=qproto, quoted_len=qlen, extensions=extensions)
    if len(inner) == 8 and qproto == socket.IPPROTO_ICMP:
        msg["ident"], msg["seq"] = struct.unpack("!HH", inner[4:8])
    elif len(inner) == 8 and qproto == socket.IPPROTO_UDP:
        msg["quoted_sport"], msg["quoted_dport"] = struct.unpack("!HH", inner[:4])
    return IcmpMessage(source, ip_ttl, icmp_type, code, **msg)


def _kind(msg):
    if msg.icmp_type == ICMP_TIME_EXCEEDED:
        return ReplyKind.TIME_EXCEEDED
    if msg.icmp_type == ICMP_ECHO_REPLY:
        return ReplyKind.ECHO_REPLY
    return ReplyKind.DEST_UNREACHABLE


def matches(msg, spec, ttl, attempt, sport):
    if msg is None or msg.icmp_type not in (ICMP_ECHO_REPLY, ICMP_TIME_EXCEEDED, ICMP_DEST_UNREACH):
        return False
    if spec.method is Method.ICMP_ECHO:
        return msg.ident == spec.flow_id and msg.seq == probe_seq(ttl, attempt)
    return (
        msg.quoted_proto == socket.IPPROTO_UDP
        and msg.quoted_sport == sport
        and msg.quoted_dport == UDP_DPORT
        and msg.quoted_len == 28 + udp_payload_len(ttl, attempt)
    )


class RawBackend:
    def __init__(self, timeout=2.0):
        self.timeout = timeout
        try:
            self._icmp = socket.socket(socket.AF_INET, socket.SOCK_RAW, socket.IPPROTO_ICMP)
            self._udp = socket.socket(socket.AF_INET, socket.SOCK_DGRAM, socket.IPPROTO_UDP)
        except OSError as exc:
            raise BackendError(f"cannot open raw sockets: {exc}") from exc

    def send_probe(self, spec, ttl, attempt, send_time):
        sport = 0x8000 | spec.flow_id
        try:
            if spec.method is Method.ICMP_ECHO:
                self._icmp.setsockopt(socket.IPPROTO_IP, socket.IP_TTL, ttl)
                packet = build_echo(spec.flow_id, probe_seq(ttl, attempt))
                start = time.perf_counter()
                self._icmp.sendto(packet, (spec.target, 0))
            else:
                if self._udp.getsockname()[1] != sport:
                    self._udp.close()
                    self._udp = socket.socket(socket.AF_INET, socket.SOCK_DGRAM, socket.IPPROTO_UDP)
                    self._udp.bind(("", sport))
                self._udp.setsockopt(socket.IPPROTO_IP, socket.IP_TTL, ttl)
                start = time.perf_counter()
                self._udp.sendto(b"\x00" * udp_payload_len(ttl, attempt), (spec.target, UDP_DPORT))
            deadline = start + self.timeout
            while True:
                remaining = deadline - time.perf_counter()
                if remaining <= 0:
                    return None
                ready, _, _ = select.select([self._icmp], [], [], remaining)
                if not ready:
                    return None
                data, _ = self._icmp.recvfrom(65535)
                msg = parse_icmp_packet(data)
                if matches(msg, spec, ttl, attempt, sport):
                    rtt = int((time.perf_counter() - start) * 1_000_000)
                    return Reply(msg.source, _kind(msg), rtt, msg.ip_ttl, msg.extensions)
        except OSError as exc:
            raise BackendError(f"probe ttl={ttl} failed: {exc}") from exc

    def close(self):
        self._icmp.close()
        self._udp.close()


def raw_available():
    return hasattr(os, "geteuid") and os.geteuid() == 0
