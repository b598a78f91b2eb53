"""Executors: how a deployment is carried out on a node."""
import logging
import random
import shlex
import string
import subprocess
import time
from typing import Protocol

import yaml

from probekit.clock import exact
from probekit.errors import ConfigError, ParseError, ProbekitError
from probekit.probe.records import deserialize_result

log = logging.getLogger(__name__)


class ExecutorError(ProbekitError):
    pass


class Executor(Protocol):
    def deploy(self, node, payload):
        """Prepare ``node`` for ``payload`` (an Event); return the duration in seconds."""

    def execute(self, node, spec):
        """Run the measurement; return (duration_s, list of TraceResult)."""


class SimulatedExecutor:
    """Durations come from ResourceProfiles, optionally with seeded
    multiplicative log-normal jitter (sigma = ``jitter``)."""

    def __init__(self, profiles, jitter=0.0, seed=0):
        self.profiles = dict(profiles)
        self.jitter = jitter
        self.rng = random.Random(seed)

    def _profile(self, event):
        try:
            return self.profiles[event.config_kind]
        except KeyError:
            raise ExecutorError(f"unknown profile {event.config_kind!r}") from None

    def _scaled(self, value):
        value = exact(value)
        if self.jitter:
            value *= exact(round(self.rng.lognormvariate(0.0, self.jitter), 6))
        return value

    def deploy(self, node, payload):
        return self._scaled(self._profile(payload).deploy_time_s)

    def execute(self, node, spec):
        return self._scaled(self._profile(spec).boot_exec_time_s), []


def _remote_argv(endpoint, script):
    if endpoint in ("local", "localhost") or endpoint.startswith("local:"):
        return ["sh", "-c", script]
    host = endpoint.rsplit(":", 1)
    argv = ["ssh", "-o", "BatchMode=yes"]
    if len(host) == 2 and host[1].isdigit():
        argv += ["-p", host[1]]
    return argv + [host[0], "sh", "-c", shlex.quote(script)]


class RemoteShellExecutor:
    """Sends a bootstrap script to the node, runs the instance and
    collects trace records from its standard output.

    ``commands`` maps profile name to ``{"deploy": script, "execute": script}``;
    scripts may use ``$node_id``, ``$endpoint``, ``$profile`` and ``$spec``;
    other ``$`` expressions are left for the shell.
    Endpoints ``local`` / ``local:<name>`` run through ``sh`` on this host,
    anything else through ``ssh``.
    """

    def __init__(self, commands, timeout=600.0):
        self.commands = commands
        self.timeout = timeout

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                doc = yaml.safe_load(fh)
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot load remote commands {path}: {exc}") from exc
        if not isinstance(doc, dict) or not isinstance(doc.get("commands"), dict):
            raise ConfigError("remote commands file needs a 'commands' mapping")
        return cls(doc["commands"], timeout=float(doc.get("timeout_s", 600.0)))

    def _run(self, node, event, step):
        try:
            template = self.commands[event.config_kind][step]
        except KeyError:
            raise ExecutorError(f"no {step} command for profile {event.config_kind!r}") from None
        script = string.Template(template).safe_substitute(
            node_id=node.node_id, endpoint=node.endpoint, profile=event.config_kind, spec=event.spec_ref or "")
        start = time.monotonic()
        try:
            proc = subprocess.run(_remote_argv(node.endpoint, script), capture_output=True,
                                  text=True, timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ExecutorError(f"{step} on {node.node_id} failed: {exc}") from exc
        elapsed = time.monotonic() - start
        if proc.returncode != 0:
            raise ExecutorError(f"{step} on {node.node_id} exited {proc.returncode}: {proc.stderr.strip()[:200]}")
        return elapsed, proc.stdout

    def deploy(self, node, payload):
        return self._run(node, payload, "deploy")[0]

    def execute(self, node, spec):
        elapsed, out = self._run(node, spec, "execute")
        results = []
        for line in out.splitlines():
            if not line.startswith("{"):
                continue
            try:
                results.append(deserialize_result(line))
            except ParseError:
                log.debug("ignoring non-trace output from %s: %.80s", node.node_id, line)
        return elapsed, results
