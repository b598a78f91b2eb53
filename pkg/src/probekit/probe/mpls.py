"""MPLS label stack entries and the ICMP multi-part extension carrying them.

Label stack entry layout (4 bytes, network order)::

     0                   1                   2                   3
    |                Label                  | TC  |S|      TTL      |

Extension structure appended to ICMP time-exceeded messages: a 4-byte
header (version in the top nibble, checksum) followed by objects, each
with a 4-byte header (length including header, class-num, c-type).
"""
import struct
from dataclasses import dataclass

from probekit.errors import MalformedExtension

EXTENSION_VERSION = 2
MPLS_CLASS = 1
MPLS_CTYPE = 1


@dataclass(frozen=True)
class MplsLabelEntry:
    label: int
    tc: int = 0
    bottom_of_stack: bool = False
    ttl: int = 0

    def __post_init__(self):
        if not 0 <= self.label < 1 << 20:
            raise ValueError(f"label out of range: {self.label}")
        if not 0 <= self.tc < 8:
            raise ValueError(f"tc out of range: {self.tc}")
        if not 0 <= self.ttl < 256:
            raise ValueError(f"ttl out of range: {self.ttl}")
        if not isinstance(self.bottom_of_stack, bool):
            raise TypeError("bottom_of_stack must be a bool")

    def as_tuple(self):
        return (self.label, self.tc, self.bottom_of_stack, self.ttl)


def encode_mpls_entry(e):
    word = (e.label << 12) | (e.tc << 9) | (int(e.bottom_of_stack) << 8) | e.ttl
    return struct.pack("!I", word)


def decode_mpls_entry(data):
    if len(data) != 4:
        raise MalformedExtension(f"label entry must be 4 bytes, got {len(data)}")
    (word,) = struct.unpack("!I", data)
    return MplsLabelEntry(
        label=word >> 12,
        tc=(word >> 9) & 0x7,
        bottom_of_stack=bool((word >> 8) & 0x1),
        ttl=word & 0xFF,
    )


def inet_checksum(data):
    if len(data) % 2:
        data += b"\x00"
    total = sum(struct.unpack(f"!{len(data) // 2}H", data))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return ~total & 0xFFFF


def build_icmp_extensions(labels, version=EXTENSION_VERSION, checksum=True):
    """Build an extension region holding one MPLS label stack object."""
    if not labels:
        return b""
    payload = b"".join(encode_mpls_entry(e) for e in labels)
    obj = struct.pack("!HBB", 4 + len(payload), MPLS_CLASS, MPLS_CTYPE) + payload
    header = struct.pack("!BBH", version << 4, 0, 0)
    raw = header + obj
    if checksum:
        csum = inet_checksum(raw)
        raw = header[:2] + struct.pack("!H", csum) + obj
    return raw


def parse_icmp_extensions(raw):
    """Return every MPLS label entry carried in the extension region ``raw``.

    Objects of other classes are skipped. A nonzero checksum is verified.
    Raises MalformedExtension when the region cannot be trusted.
    """
    raw = bytes(raw)
    if not raw:
        return []
    if len(raw) < 4:
        raise MalformedExtension("truncated extension header")
    version = raw[0] >> 4
    if version != EXTENSION_VERSION:
        raise MalformedExtension(f"unsupported extension version {version}")
    (csum,) = struct.unpack("!H", raw[2:4])
    if csum and inet_checksum(raw) != 0:
        raise MalformedExtension("extension checksum mismatch")

    entries = []
    pos = 4
    while pos < len(raw):
        if len(raw) - pos < 4:
            raise MalformedExtension("truncated object header")
        length, class_num, ctype = struct.unpack("!HBB", raw[pos:pos + 4])
        if length < 4 or pos + length > len(raw):
            raise MalformedExtension(f"bad object length {length}")
        body = raw[pos + 4:pos + length]
        if class_num == MPLS_CLASS and ctype == MPLS_CTYPE:
            if len(body) % 4:
                raise MalformedExtension("label stack object not a multiple of 4 bytes")
            entries.extend(decode_mpls_entry(body[i:i + 4]) for i in range(0, len(body), 4))
        pos += length

    if entries and not valid_stack(entries):
        raise MalformedExtension("bottom-of-stack bit must be set on the last entry only")
    return entries


def valid_stack(labels):
    if not labels:
        return True
    return labels[-1].bottom_of_stack and not any(e.bottom_of_stack for e in labels[:-1])
