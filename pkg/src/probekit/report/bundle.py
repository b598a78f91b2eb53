"""Report bundles: records plus a summary that can be recomputed from them,
written as CSV tables and figures."""
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from probekit.controller.campaign import DeploymentRecord, summarize
from probekit.errors import ConfigError, ParseError
from probekit.probe.records import result_from_dict

KINDS = ("trace", "campaign", "sim")

HOP_COLUMNS = ["trace", "target", "ttl_sent", "responder", "reply_kind", "rtt_us", "reply_ip_ttl", "fingerprint", "labels"]
DEPLOYMENT_COLUMNS = ["event_index", "profile", "node_id", "status", "enqueue_time", "start_time",
                      "deploy_duration_s", "exec_duration_s", "total_s", "error"]
SAMPLE_COLUMNS = ["profile", "t", "value", "instances"]
COUNT_COLUMNS = ["profile", "instance_count", "denied_at"]


@dataclass
class ReportBundle:
    kind: str
    records: list
    summary: dict
    csv_paths: list = field(default_factory=list)
    figure_paths: list = field(default_factory=list)


def format_labels(labels):
    return "|".join(f"{e['label']}:{e['tc']}:{int(e['bos'])}:{e['ttl']}" for e in labels)


def hop_rows(trace_dicts):
    rows = []
    for i, t in enumerate(trace_dicts):
        for h in t["hops"]:
            rows.append({
                "trace": i, "target": t["spec"]["target"], "ttl_sent": h["ttl_sent"],
                "responder": h["responder"], "reply_kind": h["reply_kind"], "rtt_us": h["rtt_us"],
                "reply_ip_ttl": h["reply_ip_ttl"], "fingerprint": h["fingerprint"],
                "labels": format_labels(h["labels"]),
            })
    return rows


def trace_summary(trace_dicts):
    hops = [h for t in trace_dicts for h in t["hops"]]
    return {
        "type": "summary",
        "traces": len(trace_dicts),
        "destination_reached": sum(t["destination_reached"] for t in trace_dicts),
        "hops": len(hops),
        "responsive_hops": sum(h["reply_kind"] != "timeout" for h in hops),
        "labelled_hops": sum(bool(h["labels"]) for h in hops),
        "errors": sum(t.get("error") is not None for t in trace_dicts),
    }


def sim_summary(runs, resource):
    counts = {r["profile"]: r["instance_count"] for r in runs}
    return {
        "type": "sim",
        "resource": resource,
        "counts": counts,
        "ratios": {a: {b: (counts[a] / counts[b] if counts[b] else None) for b in counts} for a in counts},
    }


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return str(path)


def read_jsonl(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(obj, dict):
                raise ConfigError(f"{path}: expected an object", line=lineno)
            out.append(obj)
    return out


def _close(a, b):
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k]) for k in a)
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool):
        return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)
    return a == b


class SummaryMismatch(Exception):
    pass


def build_bundle(kind, objs):
    """Split ``objs`` into records and recompute the summary.

    Raises SummaryMismatch if a stored summary disagrees with the records.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown report kind {kind!r}")
    stored = next((o for o in objs if o.get("type") in ("summary", "sim")), None)
    if kind == "trace":
        records = [o for o in objs if o.get("type") in ("trace", "result")]
        records = [o["result"] if o.get("type") == "result" else o for o in records]
        try:
            for r in records:
                result_from_dict(r)
        except ParseError as exc:
            raise ConfigError(str(exc)) from exc
        summary = trace_summary(records)
    elif kind == "campaign":
        records = [o for o in objs if o.get("type") == "deployment"]
        try:
            summary = summarize([DeploymentRecord.from_dict(o) for o in records]).to_dict()
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad deployment record: {exc}") from exc
    else:
        records = [o for o in objs if o.get("type") == "sim-run"]
        resource = stored["resource"] if stored else "memory"
        summary = sim_summary(records, resource)
    if stored is not None and not _close(stored, summary):
        raise SummaryMismatch("stored summary does not match the records")
    return ReportBundle(kind, records, summary)


def render(bundle, out_dir, plots=True):
    """Write the CSV tables (and figures) for ``bundle`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    figs = []
    if bundle.kind == "trace":
        rows = hop_rows(bundle.records)
        bundle.csv_paths.append(write_csv(out / "hops.csv", HOP_COLUMNS, rows))
        if plots:
            from probekit.report import plotting
            figs.append(plotting.trace_figure(rows, out / "trace_rtt.png"))
    elif bundle.kind == "campaign":
        bundle.csv_paths.append(write_csv(out / "deployments.csv", DEPLOYMENT_COLUMNS, bundle.records))
        if plots:
            from probekit.report import plotting
            figs.append(plotting.campaign_figure(bundle.summary, out / "campaign_success.png"))
            figs.append(plotting.node_busy_figure(bundle.summary, out / "node_busy.png"))
    else:
        samples = [
            {"profile": r["profile"], **s} for r in bundle.records for s in r.get("timeline", [])
        ]
        bundle.csv_paths.append(write_csv(out / "counts.csv", COUNT_COLUMNS, bundle.records))
        bundle.csv_paths.append(write_csv(out / "timeline.csv", SAMPLE_COLUMNS, samples))
        if plots:
            from probekit.report import plotting
            series = {}
            for s in samples:
                ts, vs = series.setdefault(s["profile"], ([], []))
                ts.append(s["t"])
                vs.append(s["value"])
            unit = "memory (MB)" if bundle.summary["resource"] == "memory" else "cores used"
            figs.append(plotting.timeline_figure(series, unit, out / "timeline.png"))
            figs.append(plotting.counts_figure(bundle.summary["counts"], out / "instances.png"))
    bundle.figure_paths.extend(str(f) for f in figs)
    return bundle
