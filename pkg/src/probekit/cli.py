"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from probekit.errors import BackendError, ConfigError, ProbekitError

log = logging.getLogger("probekit")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit_lines(lines, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
    else:
        for line in lines:
            print(line)


def _dump(obj):
    return json.dumps(obj, separators=(",", ":"))


def _csv_lines(columns, rows):
    import csv
    import io

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue().splitlines()


def _backend(spec, seed):
    from probekit.probe.backends import SimBackend, load_topology

    if spec == "raw":
        from probekit.probe.rawsock import RawBackend

        return RawBackend(), None
    kind, sep, path = spec.partition(":")
    if kind != "sim" or not sep or not path:
        raise UsageError(f"--backend must be sim:<topology-file> or raw, got {spec!r}")
    if not Path(path).is_file():
        raise UsageError(f"topology file not found: {path}")
    topo = load_topology(path)
    if seed is not None:
        from dataclasses import replace

        topo = replace(topo, seed=seed)
    return SimBackend(topo), topo


# trace


def cmd_trace(args):
    from probekit.clock import VirtualClock, WallClock
    from probekit.probe.model import ProbeSpec
    from probekit.probe.records import hop_to_dict, result_to_dict
    from probekit.probe.trace import run_trace
    from probekit.report.bundle import HOP_COLUMNS, hop_rows

    net, topo = _backend(args.backend, args.seed)
    target = args.target or (topo.destination if topo else None)
    if target is None:
        raise UsageError("--target is required with the raw backend")
    try:
        spec = ProbeSpec(target=target, method=args.method, max_ttl=args.max_ttl,
                         attempts_per_hop=args.attempts, pps=args.pps, gap_limit=args.gap_limit,
                         flow_id=args.flow_id)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    clock = VirtualClock() if topo is not None else WallClock()
    try:
        result = run_trace(spec, net, clock)
    finally:
        net.close()
    doc = result_to_dict(result)
    if args.format == "csv":
        lines = _csv_lines(HOP_COLUMNS, hop_rows([doc]))
    else:
        lines = [_dump({"type": "hop", **hop_to_dict(h)}) for h in result.hops] + [_dump(doc)]
    _emit_lines(lines, args.out)
    if result.error:
        log.error("trace aborted: %s", result.error)
        return EXIT_FAIL
    return EXIT_OK


# agent


def cmd_agent_serve(args):
    from probekit.agent.core import Agent
    from probekit.agent.server import serve

    try:
        net, _ = _backend(args.backend, args.seed)
    except BackendError as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    if args.pps <= 0 or args.max_parallel < 1:
        raise UsageError("--pps must be positive and --max-parallel >= 1")
    agent = Agent(net, pps=args.pps, max_parallel=args.max_parallel)

    def ready(addr):
        log.info("listening on %s:%d", *addr)
        print(f"listening {addr[0]}:{addr[1]}", file=sys.stderr, flush=True)

    return serve(args.listen, agent, ready)


# controller


def _executor(spec, profiles_needed, seed, jitter):
    from probekit.budget.profiles import load_profiles
    from probekit.controller.executors import RemoteShellExecutor, SimulatedExecutor

    kind, _, path = spec.partition(":")
    if kind == "sim":
        profiles = load_profiles(path or None)
        missing = sorted(set(profiles_needed) - set(profiles))
        if missing:
            raise ConfigError(f"schedule uses unknown profiles: {', '.join(missing)}")
        return SimulatedExecutor(profiles, jitter=jitter, seed=seed or 0)
    if kind == "remote":
        if not path:
            raise UsageError("--executor remote needs a commands file: remote:<file>")
        ex = RemoteShellExecutor.from_file(path)
        missing = sorted(set(profiles_needed) - set(ex.commands))
        if missing:
            raise ConfigError(f"no remote commands for profiles: {', '.join(missing)}")
        return ex
    raise UsageError(f"--executor must be sim[:profiles] or remote:<file>, got {spec!r}")


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def cmd_controller_run(args):
    from probekit.clock import VirtualClock, WallClock
    from probekit.controller import Policy, load_node_config, load_schedule, run_campaign, summarize
    from probekit.report.bundle import DEPLOYMENT_COLUMNS

    nodes = load_node_config(_read(args.nodes))
    schedule = load_schedule(_read(args.schedule))
    executor = _executor(args.executor, {e.config_kind for e in schedule}, args.seed, args.jitter)
    clock = WallClock() if args.executor.startswith("remote") else VirtualClock()
    records = run_campaign(schedule, nodes, Policy.parse(args.policy), executor, clock)
    summary = summarize(records).to_dict()
    rows = [r.to_dict() for r in records]
    if args.format == "csv":
        lines = _csv_lines(DEPLOYMENT_COLUMNS, rows)
    else:
        lines = [_dump(r) for r in rows] + [_dump(summary)]
    _emit_lines(lines, args.out)
    if args.out and args.format != "csv":
        _emit_lines(_csv_lines(DEPLOYMENT_COLUMNS, rows), str(Path(args.out).with_suffix(".csv")))
    return EXIT_OK


# sim


def _budget(args):
    from probekit.budget.profiles import BudgetConfig, KsmModel

    ksm = None
    if args.ksm:
        key, _, value = args.ksm.partition("=")
        try:
            if key != "scan":
                raise ValueError
            ksm = KsmModel(scan_rate_pages_per_s=float(value))
        except ValueError:
            raise UsageError(f"--ksm expects scan=<pages per second>, got {args.ksm!r}") from None
    return BudgetConfig(mem_budget_mb=args.budget_mb, cpu_cap_fraction=args.cap, cores=args.cores,
                        launch_gap_s=args.gap_s, run_duration_s=args.run_s, ksm=ksm,
                        boot_window_s=args.boot_window_s)


def sim_records(report):
    out = []
    for name, run in report.runs.items():
        if report.resource == "memory":
            timeline = [{"t": s.t, "value": s.memory_mb, "instances": s.instances} for s in run.timeline]
        else:
            timeline = [{"t": s.t, "value": s.cores_used, "instances": s.instances} for s in run.timeline]
        out.append({"type": "sim-run", "resource": report.resource, "profile": name,
                    "instance_count": run.instance_count, "denied_at": run.denied_at, "timeline": timeline})
    return out


def cmd_sim(args):
    from probekit.budget.compare import compare_profiles
    from probekit.budget.profiles import load_profiles
    from probekit.report.bundle import SAMPLE_COLUMNS

    profiles = load_profiles(args.profiles)
    if args.profile:
        unknown = [p for p in args.profile if p not in profiles]
        if unknown:
            raise ConfigError(f"unknown profile(s): {', '.join(unknown)}")
        profiles = {p: profiles[p] for p in args.profile}
    report = compare_profiles(profiles, _budget(args), args.resource)
    runs = sim_records(report)
    if args.format == "csv":
        rows = [{"profile": r["profile"], **s} for r in runs for s in r["timeline"]]
        lines = _csv_lines(SAMPLE_COLUMNS, rows)
    else:
        lines = [_dump(report.to_dict())] + [_dump(r) for r in runs]
    _emit_lines(lines, args.out)
    return EXIT_OK


# report


def cmd_report(args):
    from probekit.report.bundle import SummaryMismatch, build_bundle, read_jsonl, render

    if not Path(args.input).is_file():
        raise UsageError(f"input not found: {args.input}")
    objs = read_jsonl(args.input)
    try:
        bundle = build_bundle(args.kind, objs)
    except SummaryMismatch as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    out_dir = args.out or "report"
    render(bundle, out_dir, plots=not args.no_plots)
    print(_dump({"kind": bundle.kind, "summary": bundle.summary, "csv": bundle.csv_paths,
                 "figures": bundle.figure_paths}))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for simulated randomness")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (directory for report)")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="probekit", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", parents=[common], help="run one traceroute")
    p.add_argument("--backend", required=True, help="sim:<topology.json> or raw")
    p.add_argument("--target", help="IPv4 destination (defaults to the topology destination)")
    p.add_argument("--method", choices=("icmp-echo", "udp"), default="icmp-echo")
    p.add_argument("--max-ttl", type=int, default=30)
    p.add_argument("--attempts", type=int, default=3)
    p.add_argument("--pps", type=float, default=100.0)
    p.add_argument("--gap-limit", type=int, default=5)
    p.add_argument("--flow-id", type=int, default=0)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("agent", parents=[common], help="measurement agent")
    agent_sub = p.add_subparsers(dest="action", required=True)
    s = agent_sub.add_parser("serve", parents=[common], help="listen for commands")
    s.add_argument("--listen", default="127.0.0.1:31337", help="host:port")
    s.add_argument("--pps", type=float, default=100.0)
    s.add_argument("--backend", required=True, help="sim:<topology.json> or raw")
    s.add_argument("--max-parallel", type=int, default=1)
    s.set_defaults(func=cmd_agent_serve)

    p = sub.add_parser("controller", parents=[common], help="deployment campaigns")
    ctl_sub = p.add_subparsers(dest="action", required=True)
    s = ctl_sub.add_parser("run", parents=[common], help="run a campaign")
    s.add_argument("--nodes", required=True)
    s.add_argument("--schedule", required=True)
    s.add_argument("--policy", choices=("wait", "discard"), type=str.lower, required=True)
    s.add_argument("--executor", default="sim", help="sim[:profiles.yaml] or remote:<commands.yaml>")
    s.add_argument("--jitter", type=float, default=0.0, help="log-normal sigma for simulated durations")
    s.set_defaults(func=cmd_controller_run)

    p = sub.add_parser("sim", parents=[common], help="fixed-budget packing simulation")
    p.add_argument("resource", choices=("memory", "cpu"))
    p.add_argument("--profiles", help="profiles YAML (defaults to the bundled set)")
    p.add_argument("--profile", action="append", help="restrict to this profile (repeatable)")
    p.add_argument("--budget-mb", type=float, default=1024.0)
    p.add_argument("--cap", type=float, default=0.25)
    p.add_argument("--cores", type=int, default=16)
    p.add_argument("--gap-s", type=float, default=0.1)
    p.add_argument("--run-s", type=float, default=60.0)
    p.add_argument("--boot-window-s", type=float, default=None)
    p.add_argument("--ksm", help="enable page merging, e.g. scan=5000")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("report", parents=[common], help="render CSV tables and figures")
    p.add_argument("--kind", choices=("trace", "campaign", "sim"), required=True)
    p.add_argument("--in", dest="input", required=True, help="JSON-lines records")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("out", None), ("format", "json"), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"probekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BackendError, ProbekitError, OSError) as exc:
        print(f"probekit: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
