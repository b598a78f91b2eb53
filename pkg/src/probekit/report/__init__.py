from probekit.report.bundle import ReportBundle, SummaryMismatch, build_bundle, read_jsonl, render

__all__ = ["ReportBundle", "SummaryMismatch", "build_bundle", "read_jsonl", "render"]
