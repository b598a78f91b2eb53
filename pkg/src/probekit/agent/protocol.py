"""Line-delimited JSON control protocol.

Requests::

    {"kind": "trace", "request_id": "r1", "spec": {"target": "1.1.1.1", ...}}
    {"kind": "status", "request_id": "r2"}
    {"kind": "quit", "request_id": "r3"}

Every response object carries ``request_id`` and ``type``, one of
progress, result, status, error or bye. result, status, error and bye are
final: each accepted line gets exactly one of them.
"""
import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from probekit.errors import BadCommand, ParseError
from probekit.probe.model import ProbeSpec
from probekit.probe.records import hop_to_dict, result_to_dict, spec_from_dict, spec_to_dict

MAX_LINE_BYTES = 65536
FINAL_TYPES = frozenset({"result", "status", "error", "bye"})


class CommandKind(str, Enum):
    TRACE = "trace"
    STATUS = "status"
    QUIT = "quit"


@dataclass(frozen=True)
class Command:
    kind: CommandKind
    request_id: str
    payload: Optional[ProbeSpec] = None

    def to_line(self):
        obj = {"kind": self.kind.value, "request_id": self.request_id}
        if self.payload is not None:
            obj["spec"] = spec_to_dict(self.payload)
        return json.dumps(obj, separators=(",", ":"))


def parse_command(line):
    if isinstance(line, (bytes, bytearray)):
        if len(line) > MAX_LINE_BYTES:
            raise BadCommand("line too long")
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BadCommand(f"not UTF-8: {exc.reason}") from exc
    line = line.strip()
    if not line:
        raise BadCommand("empty line")
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise BadCommand(f"not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise BadCommand("command must be a JSON object")

    rid = obj.get("request_id")
    if not isinstance(rid, str) or not rid:
        raise BadCommand("request_id must be a nonempty string")
    try:
        kind = CommandKind(obj.get("kind"))
    except ValueError:
        raise BadCommand(f"unknown command kind {obj.get('kind')!r}", rid) from None

    if kind is CommandKind.TRACE:
        spec = obj.get("spec")
        if not isinstance(spec, dict):
            raise BadCommand("trace requires a spec object", rid)
        try:
            payload = spec_from_dict(spec)
        except ParseError as exc:
            raise BadCommand(str(exc), rid) from exc
        return Command(kind, rid, payload)
    if "spec" in obj:
        raise BadCommand(f"{kind.value} takes no spec", rid)
    return Command(kind, rid)


def progress_record(request_id, hop):
    return {"type": "progress", "request_id": request_id, "hop": hop_to_dict(hop)}


def result_record(request_id, result):
    return {"type": "result", "request_id": request_id, "result": result_to_dict(result)}


def status_record(request_id, queued, active, uptime_s=None):
    rec = {"type": "status", "request_id": request_id, "queued": queued, "active": active}
    if uptime_s is not None:
        rec["uptime_s"] = uptime_s
    return rec


def error_record(request_id, message, partial=None):
    rec = {"type": "error", "request_id": request_id, "message": message}
    if partial is not None:
        rec["partial"] = result_to_dict(partial)
    return rec


def bye_record(request_id):
    return {"type": "bye", "request_id": request_id}


def encode_record(rec):
    return json.dumps(rec, separators=(",", ":")) + "\n"
