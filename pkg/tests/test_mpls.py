import struct

import pytest
from hypothesis import given, strategies as st

from probekit.errors import MalformedExtension
from probekit.probe.mpls import (
    MplsLabelEntry,
    build_icmp_extensions,
    decode_mpls_entry,
    encode_mpls_entry,
    inet_checksum,
    parse_icmp_extensions,
)

entries = st.builds(
    MplsLabelEntry,
    label=st.integers(0, (1 << 20) - 1),
    tc=st.integers(0, 7),
    bottom_of_stack=st.booleans(),
    ttl=st.integers(0, 255),
)


def header(version=2, checksum=0):
    return struct.pack("!BBH", version << 4, 0, checksum)


def obj(class_num, ctype, payload):
    return struct.pack("!HBB", 4 + len(payload), class_num, ctype) + payload


@pytest.mark.parametrize("entry, expected", [
    (MplsLabelEntry(0, 0, False, 0), bytes([0x00, 0x00, 0x00, 0x00])),
    (MplsLabelEntry(0xFFFFF, 7, True, 255), bytes([0xFF, 0xFF, 0xFF, 0xFF])),
    # (16 << 12) | (1 << 8) | 1 == 0x00010101
    (MplsLabelEntry(16, 0, True, 1), bytes([0x00, 0x01, 0x01, 0x01])),
])
def test_encode_vectors(entry, expected):
    assert encode_mpls_entry(entry) == expected


@given(entries)
def test_codec_roundtrip(e):
    word = encode_mpls_entry(e)
    assert len(word) == 4
    assert decode_mpls_entry(word) == e


@pytest.mark.parametrize("kwargs", [
    dict(label=1 << 20), dict(label=-1), dict(label=0, tc=8), dict(label=0, ttl=256),
])
def test_entry_rejects_out_of_range(kwargs):
    with pytest.raises(ValueError):
        MplsLabelEntry(**kwargs)


def test_parse_empty():
    assert parse_icmp_extensions(b"") == []


def test_parse_single_label_object():
    raw = header() + obj(1, 1, bytes([0x00, 0x01, 0x01, 0x01]))
    assert parse_icmp_extensions(raw) == [MplsLabelEntry(16, 0, True, 1)]


def test_parse_rejects_bad_version():
    raw = header(version=3) + obj(1, 1, bytes([0x00, 0x01, 0x01, 0x01]))
    with pytest.raises(MalformedExtension):
        parse_icmp_extensions(raw)


@pytest.mark.parametrize("raw", [
    b"\x20\x00",                                           # short header
    header() + b"\x00\x08\x01",                            # short object header
    header() + struct.pack("!HBB", 12, 1, 1) + b"\x00" * 4,  # object longer than data
    header() + struct.pack("!HBB", 2, 1, 1),               # object shorter than its header
    header() + obj(1, 1, b"\x00\x01\x01"),                 # partial label entry
])
def test_parse_rejects_truncation(raw):
    with pytest.raises(MalformedExtension):
        parse_icmp_extensions(raw)


def test_parse_rejects_misplaced_bottom_of_stack():
    payload = encode_mpls_entry(MplsLabelEntry(1, 0, True, 1)) + encode_mpls_entry(MplsLabelEntry(2, 0, False, 1))
    with pytest.raises(MalformedExtension):
        parse_icmp_extensions(header() + obj(1, 1, payload))


def test_parse_skips_other_objects():
    raw = header() + obj(2, 1, b"\xAA" * 8) + obj(1, 1, encode_mpls_entry(MplsLabelEntry(300, 2, True, 9)))
    assert parse_icmp_extensions(raw) == [MplsLabelEntry(300, 2, True, 9)]


def test_checksum_verified_when_nonzero():
    stack = [MplsLabelEntry(100, 1, False, 5), MplsLabelEntry(200, 0, True, 5)]
    raw = build_icmp_extensions(stack)
    assert raw[2:4] != b"\x00\x00"
    assert inet_checksum(raw) == 0
    assert parse_icmp_extensions(raw) == stack
    corrupted = raw[:-1] + bytes([raw[-1] ^ 0x01])
    with pytest.raises(MalformedExtension):
        parse_icmp_extensions(corrupted)


@given(st.lists(entries, min_size=1, max_size=6))
def test_build_parse_roundtrip(stack):
    stack = [MplsLabelEntry(e.label, e.tc, False, e.ttl) for e in stack[:-1]] + [
        MplsLabelEntry(stack[-1].label, stack[-1].tc, True, stack[-1].ttl)
    ]
    assert parse_icmp_extensions(build_icmp_extensions(stack)) == stack
    assert parse_icmp_extensions(build_icmp_extensions(stack, checksum=False)) == stack


@given(st.binary(max_size=64))
def test_parse_never_raises_anything_else(raw):
    try:
        parse_icmp_extensions(raw)
    except MalformedExtension:
        pass
