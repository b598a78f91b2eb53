"""One-JSON-object-per-line encoding of trace results."""
import json

from probekit.errors import ParseError
from probekit.probe.model import HopRecord, ProbeSpec, TraceResult
from probekit.probe.mpls import MplsLabelEntry


def label_to_dict(e):
    return {"label": e.label, "tc": e.tc, "bos": e.bottom_of_stack, "ttl": e.ttl}


def spec_to_dict(spec):
    return {
        "target": spec.target,
        "method": spec.method.value,
        "max_ttl": spec.max_ttl,
        "attempts_per_hop": spec.attempts_per_hop,
        "pps": spec.pps,
        "gap_limit": spec.gap_limit,
        "flow_id": spec.flow_id,
    }


def hop_to_dict(h):
    return {
        "ttl_sent": h.ttl_sent,
        "responder": h.responder,
        "reply_kind": h.reply_kind.value,
        "rtt_us": h.rtt_us,
        "reply_ip_ttl": h.reply_ip_ttl,
        "labels": [label_to_dict(e) for e in h.labels],
        "fingerprint": h.fingerprint,
    }


def result_to_dict(r):
    return {
        "type": "trace",
        "spec": spec_to_dict(r.spec),
        "hops": [hop_to_dict(h) for h in r.hops],
        "destination_reached": r.destination_reached,
        "started_at": r.started_at,
        "finished_at": r.finished_at,
        "error": r.error,
    }


def _int(obj, key, optional=False):
    v = obj[key] if not optional else obj.get(key)
    if v is None and optional:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{key} must be an integer")
    return v


def _bool(obj, key):
    v = obj[key]
    if not isinstance(v, bool):
        raise ParseError(f"{key} must be a boolean")
    return v


def spec_from_dict(obj):
    try:
        pps = obj.get("pps", 100.0)
        if isinstance(pps, bool) or not isinstance(pps, (int, float)):
            raise ParseError("pps must be a number")
        return ProbeSpec(
            target=obj["target"],
            method=obj.get("method", "icmp-echo"),
            max_ttl=_int(obj, "max_ttl") if "max_ttl" in obj else 30,
            attempts_per_hop=_int(obj, "attempts_per_hop") if "attempts_per_hop" in obj else 3,
            pps=pps,
            gap_limit=_int(obj, "gap_limit") if "gap_limit" in obj else 5,
            flow_id=_int(obj, "flow_id") if "flow_id" in obj else 0,
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"invalid probe spec: {exc!r}") from exc


def label_from_dict(obj):
    return MplsLabelEntry(_int(obj, "label"), _int(obj, "tc"), _bool(obj, "bos"), _int(obj, "ttl"))


def hop_from_dict(obj):
    return HopRecord(
        ttl_sent=_int(obj, "ttl_sent"),
        reply_kind=obj["reply_kind"],
        responder=obj.get("responder"),
        rtt_us=_int(obj, "rtt_us", optional=True),
        reply_ip_ttl=_int(obj, "reply_ip_ttl", optional=True),
        labels=[label_from_dict(e) for e in obj["labels"]],
        fingerprint=_int(obj, "fingerprint", optional=True),
    )


def result_from_dict(obj):
    try:
        if obj.get("type", "trace") != "trace":
            raise ParseError(f"not a trace record: {obj.get('type')!r}")
        error = obj.get("error")
        if error is not None and not isinstance(error, str):
            raise ParseError("error must be a string")
        return TraceResult(
            spec=spec_from_dict(obj["spec"]),
            hops=[hop_from_dict(h) for h in obj["hops"]],
            destination_reached=_bool(obj, "destination_reached"),
            started_at=_int(obj, "started_at"),
            finished_at=_int(obj, "finished_at"),
            error=error,
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"invalid trace record: {exc!r}") from exc


def serialize_result(r):
    """Encode ``r`` as a single line of JSON (no trailing newline)."""
    return json.dumps(result_to_dict(r), separators=(",", ":"))


def deserialize_result(line):
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"not a JSON record: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("record must be a JSON object")
    return result_from_dict(obj)
