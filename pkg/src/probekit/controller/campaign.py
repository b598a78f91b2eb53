import logging
import statistics
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from probekit.clock import VirtualClock
from probekit.controller.scheduling import (
    Assigned, CampaignPolicy, Discarded, NodeRegistry, Policy, Waited, node_sort_key, select_node,
)

log = logging.getLogger(__name__)


class Status(str, Enum):
    COMPLETED = "completed"
    DISCARDED = "discarded"


@dataclass
class DeploymentRecord:
    event_index: int
    status: Status
    enqueue_time: object
    profile: str = ""
    node_id: Optional[str] = None
    start_time: object = None
    deploy_duration_s: object = None
    exec_duration_s: object = None
    total_s: object = None
    error: Optional[str] = None
    results: list = field(default_factory=list, repr=False, compare=False)

    @property
    def wait_s(self):
        return None if self.start_time is None else self.start_time - self.enqueue_time

    @property
    def end_time(self):
        return None if self.start_time is None else self.start_time + self.deploy_duration_s + self.exec_duration_s

    def to_dict(self):
        def num(v):
            return None if v is None else float(v)

        return {
            "type": "deployment",
            "event_index": self.event_index,
            "profile": self.profile,
            "node_id": self.node_id,
            "status": self.status.value,
            "enqueue_time": num(self.enqueue_time),
            "start_time": num(self.start_time),
            "deploy_duration_s": num(self.deploy_duration_s),
            "exec_duration_s": num(self.exec_duration_s),
            "total_s": num(self.total_s),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            event_index=int(obj["event_index"]),
            status=Status(obj["status"]),
            enqueue_time=obj["enqueue_time"],
            profile=obj.get("profile", ""),
            node_id=obj.get("node_id"),
            start_time=obj.get("start_time"),
            deploy_duration_s=obj.get("deploy_duration_s"),
            exec_duration_s=obj.get("exec_duration_s"),
            total_s=obj.get("total_s"),
            error=obj.get("error"),
        )


def _discarded(event, error=None):
    return DeploymentRecord(event.index, Status.DISCARDED, event.offset_s, event.config_kind, error=error)


def run_campaign(schedule, nodes, policy, executor, clock=None):
    """Dispatch every scheduled event to a node; return one record per event.

    With a VirtualClock (the default) the campaign is a deterministic
    discrete-event replay: executor durations are taken as simulated time.
    With a wall clock, events fire in real time and deployments run on
    threads, one in flight per node.
    """
    if isinstance(policy, CampaignPolicy):
        policy = policy.mode
    policy = Policy(policy)
    if clock is None or isinstance(clock, VirtualClock):
        return _run_virtual(schedule, nodes, policy, executor, clock or VirtualClock())
    return _run_realtime(schedule, nodes, policy, executor, clock)


def _run_virtual(schedule, nodes, policy, executor, clock):
    registry = NodeRegistry(nodes)
    origin = clock.now()
    records = []
    for event in schedule:
        clock.sleep_until(origin + event.offset_s)
        now = event.offset_s
        decision = select_node(registry, policy, now)
        if isinstance(decision, Discarded):
            records.append(_discarded(event))
            continue
        start = now if isinstance(decision, Assigned) else decision.until
        node = decision.node
        try:
            deploy = executor.deploy(node, event)
            execute, results = executor.execute(node, event)
        except Exception as exc:
            log.warning("event %d on %s failed: %s", event.index, node.node_id, exc)
            records.append(_discarded(event, f"{type(exc).__name__}: {exc}"))
            continue
        registry.reserve(node, start, start + deploy + execute)
        records.append(DeploymentRecord(
            event.index, Status.COMPLETED, now, event.config_kind, node.node_id, start,
            deploy, execute, deploy + execute + (start - now), results=results,
        ))
    if schedule.events:
        registry.refresh_states(schedule.events[-1].offset_s)
    return records


def _run_realtime(schedule, nodes, policy, executor, clock):
    ordered = sorted(nodes, key=lambda n: node_sort_key(n.node_id))
    busy = {n.node_id: False for n in ordered}
    cond = threading.Condition()
    records = [None] * len(schedule)
    threads = []
    origin = clock.now()

    def work(node, event, start):
        try:
            deploy = executor.deploy(node, event)
            execute, results = executor.execute(node, event)
            rec = DeploymentRecord(event.index, Status.COMPLETED, event.offset_s, event.config_kind,
                                   node.node_id, start, deploy, execute,
                                   deploy + execute + (start - event.offset_s), results=results)
        except Exception as exc:
            rec = _discarded(event, f"{type(exc).__name__}: {exc}")
        with cond:
            records[event.index] = rec
            busy[node.node_id] = False
            cond.notify_all()

    for event in schedule:
        clock.sleep_until(origin + float(event.offset_s))
        with cond:
            free = [n for n in ordered if not busy[n.node_id]]
            if not free and policy is Policy.DISCARD:
                records[event.index] = _discarded(event)
                continue
            cond.wait_for(lambda: any(not b for b in busy.values()))
            node = next(n for n in ordered if not busy[n.node_id])
            busy[node.node_id] = True
        start = clock.now() - origin
        t = threading.Thread(target=work, args=(node, event, start), daemon=True)
        t.start()
        threads.append(t)
    for t in threads:
        t.join()
    return records


@dataclass
class CampaignReport:
    events: int
    completed: int
    discarded: int
    success_rate: float
    mean_total_s: Optional[object]
    stddev_total_s: Optional[float]
    per_node_busy_s: dict
    per_profile: dict

    def to_dict(self):
        def num(v):
            return None if v is None else float(v)

        return {
            "type": "summary",
            "events": self.events,
            "completed": self.completed,
            "discarded": self.discarded,
            "success_rate": self.success_rate,
            "mean_total_s": num(self.mean_total_s),
            "stddev_total_s": num(self.stddev_total_s),
            "per_node_busy_s": {k: float(v) for k, v in self.per_node_busy_s.items()},
            "per_profile": {
                name: {k: num(v) if k in ("mean_total_s", "success_rate") else v for k, v in p.items()}
                for name, p in self.per_profile.items()
            },
        }


def _stats(totals):
    if not totals:
        return None, None
    return statistics.mean(totals), statistics.pstdev(totals)


def summarize(records):
    done = [r for r in records if r.status is Status.COMPLETED]
    mean, std = _stats([r.total_s for r in done])
    busy = {}
    for r in done:
        busy[r.node_id] = busy.get(r.node_id, 0) + r.deploy_duration_s + r.exec_duration_s
    per_profile = {}
    for name in dict.fromkeys(r.profile for r in records):
        mine = [r for r in records if r.profile == name]
        ok = [r for r in mine if r.status is Status.COMPLETED]
        per_profile[name] = {
            "events": len(mine),
            "completed": len(ok),
            "success_rate": len(ok) / len(mine),
            "mean_total_s": _stats([r.total_s for r in ok])[0],
        }
    return CampaignReport(
        events=len(records),
        completed=len(done),
        discarded=len(records) - len(done),
        success_rate=len(done) / len(records) if records else 0.0,
        mean_total_s=mean,
        stddev_total_s=std,
        per_node_busy_s=dict(sorted(busy.items(), key=lambda kv: node_sort_key(kv[0]))),
        per_profile=per_profile,
    )
