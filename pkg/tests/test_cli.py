import json
import socket
from pathlib import Path

import pytest

from probekit.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
TOPO = CONFIGS / "topology.json"


def lines_of(capsys):
    return [json.loads(line) for line in capsys.readouterr().out.splitlines() if line.strip()]


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "trace" in capsys.readouterr().out


def test_trace_sim_json(capsys):
    assert main(["trace", "--backend", f"sim:{TOPO}", "--seed", "3"]) == 0
    out = lines_of(capsys)
    hops = [r for r in out if r.get("type") == "hop"]
    final = out[-1]
    assert len(hops) == len(final["hops"]) > 0
    assert final["destination_reached"] is True


def test_trace_is_deterministic_under_seed(capsys):
    main(["trace", "--backend", f"sim:{TOPO}", "--seed", "9"])
    first = capsys.readouterr().out
    main(["trace", "--backend", f"sim:{TOPO}", "--seed", "9"])
    assert capsys.readouterr().out == first


def test_trace_csv(capsys):
    assert main(["trace", "--backend", f"sim:{TOPO}", "--format", "csv"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0].startswith("target,") or "ttl" in rows[0]
    assert len(rows) > 1


def test_trace_missing_topology(capsys):
    assert main(["trace", "--backend", "sim:/nonexistent/topo.json"]) == 2
    assert "not found" in capsys.readouterr().err


def test_trace_bad_backend():
    assert main(["trace", "--backend", "carrier-pigeon"]) == 2


def test_trace_bad_spec():
    assert main(["trace", "--backend", f"sim:{TOPO}", "--max-ttl", "0"]) == 2


def test_controller_run(tmp_path, capsys):
    out = tmp_path / "c.jsonl"
    rc = main(["controller", "run", "--nodes", str(CONFIGS / "nodes.conf"),
               "--schedule", str(CONFIGS / "schedule.conf"), "--policy", "discard", "--out", str(out)])
    assert rc == 0
    recs = [json.loads(x) for x in out.read_text().splitlines()]
    assert len(recs) == 61
    assert out.with_suffix(".csv").is_file()


def test_controller_bad_policy(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["controller", "run", "--nodes", str(CONFIGS / "nodes.conf"),
              "--schedule", str(CONFIGS / "schedule.conf"), "--policy", "sometimes"])
    assert exc.value.code == 2


def test_controller_empty_schedule(tmp_path, capsys):
    sched = tmp_path / "empty.conf"
    sched.write_text("# nothing scheduled\n")
    rc = main(["controller", "run", "--nodes", str(CONFIGS / "nodes.conf"),
               "--schedule", str(sched), "--policy", "wait"])
    assert rc == 0
    out = lines_of(capsys)
    assert len(out) == 1 and out[0]["events"] == 0


def test_controller_empty_nodes_is_config_error(tmp_path, capsys):
    nodes = tmp_path / "nodes.conf"
    nodes.write_text("")
    rc = main(["controller", "run", "--nodes", str(nodes),
               "--schedule", str(CONFIGS / "schedule.conf"), "--policy", "wait"])
    assert rc == 2


def test_controller_unknown_profile(tmp_path):
    sched = tmp_path / "s.conf"
    sched.write_text("0 nosuchprofile\n")
    rc = main(["controller", "run", "--nodes", str(CONFIGS / "nodes.conf"),
               "--schedule", str(sched), "--policy", "wait"])
    assert rc == 2


def test_sim_memory_ratios(capsys):
    assert main(["sim", "memory", "--profile", "utnt", "--profile", "docker"]) == 0
    out = lines_of(capsys)
    summary = out[0]
    assert set(summary["counts"]) == {"utnt", "docker"}
    assert [r["profile"] for r in out[1:]] == ["utnt", "docker"]


def test_sim_unknown_profile(capsys):
    assert main(["sim", "cpu", "--profile", "qemu"]) == 2


def test_sim_bad_ksm(capsys):
    assert main(["sim", "memory", "--ksm", "fast"]) == 2


def test_report_campaign_writes_figures(tmp_path, capsys):
    recs = tmp_path / "c.jsonl"
    main(["controller", "run", "--nodes", str(CONFIGS / "nodes.conf"),
          "--schedule", str(CONFIGS / "schedule.conf"), "--policy", "wait", "--out", str(recs)])
    outdir = tmp_path / "rep"
    assert main(["report", "--kind", "campaign", "--in", str(recs), "--out", str(outdir)]) == 0
    info = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert info["figures"]
    for p in info["figures"] + info["csv"]:
        assert Path(p).is_file() and Path(p).stat().st_size > 0


def test_report_sim_figures(tmp_path, capsys):
    recs = tmp_path / "s.jsonl"
    main(["sim", "memory", "--run-s", "5", "--out", str(recs)])
    outdir = tmp_path / "rep"
    assert main(["report", "--kind", "sim", "--in", str(recs), "--out", str(outdir)]) == 0
    assert (outdir / "timeline.png").is_file()
    assert (outdir / "counts.csv").is_file()


def test_report_empty_input_gives_headers_only(tmp_path, capsys):
    recs = tmp_path / "empty.jsonl"
    recs.write_text("")
    outdir = tmp_path / "rep"
    assert main(["report", "--kind", "campaign", "--in", str(recs), "--out", str(outdir),
                 "--no-plots"]) == 0
    csv_lines = (outdir / "deployments.csv").read_text().splitlines()
    assert len(csv_lines) == 1


def test_report_summary_mismatch(tmp_path, capsys):
    recs = tmp_path / "c.jsonl"
    main(["controller", "run", "--nodes", str(CONFIGS / "nodes.conf"),
          "--schedule", str(CONFIGS / "schedule.conf"), "--policy", "discard", "--out", str(recs)])
    lines = recs.read_text().splitlines()
    summary = json.loads(lines[-1])
    summary["completed"] -= 1
    lines[-1] = json.dumps(summary)
    recs.write_text("\n".join(lines) + "\n")
    assert main(["report", "--kind", "campaign", "--in", str(recs), "--out", str(tmp_path / "r")]) == 1


def test_report_missing_input(tmp_path):
    assert main(["report", "--kind", "trace", "--in", str(tmp_path / "nope.jsonl")]) == 2


def test_agent_serve_port_in_use():
    holder = socket.socket()
    holder.bind(("127.0.0.1", 0))
    holder.listen(1)
    port = holder.getsockname()[1]
    try:
        rc = main(["agent", "serve", "--listen", f"127.0.0.1:{port}", "--backend", f"sim:{TOPO}"])
    finally:
        holder.close()
    assert rc == 1
