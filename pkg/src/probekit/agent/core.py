"""Agent state, command handling and the worker pool."""
import logging
import threading
from collections import deque

from probekit.agent import protocol
from probekit.agent.protocol import CommandKind
from probekit.clock import WallClock
from probekit.errors import BadCommand
from probekit.probe.ratelimit import RateLimiter
from probekit.probe.trace import trace_steps

log = logging.getLogger(__name__)


class AgentState:
    def __init__(self, pps, clock=None, max_parallel=1):
        if max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")
        self.clock = clock if clock is not None else WallClock()
        self.limiter = RateLimiter(pps)
        self.max_parallel = max_parallel
        self.queue = deque()
        self.active = 0
        self.stopping = False
        self.started_at = self.clock.now()
        self.cond = threading.Condition()

    def uptime(self):
        return float(self.clock.now() - self.started_at)


def handle(command, state, backend):
    """Yield the response records for one command.

    A trace yields one progress record per hop and then a single result
    record, or an error record if the backend failed.
    """
    rid = command.request_id
    if command.kind is CommandKind.STATUS:
        with state.cond:
            queued, active = len(state.queue), state.active
        yield protocol.status_record(rid, queued, active, state.uptime())
        return
    if command.kind is CommandKind.QUIT:
        with state.cond:
            state.stopping = True
            state.cond.notify_all()
        yield protocol.bye_record(rid)
        return

    steps = trace_steps(command.payload, backend, state.clock, state.limiter)
    try:
        while True:
            try:
                hop = next(steps)
            except StopIteration as done:
                result = done.value
                break
            yield protocol.progress_record(rid, hop)
    except Exception as exc:  # keep the agent alive whatever the backend does
        log.exception("trace %s crashed", rid)
        yield protocol.error_record(rid, f"{type(exc).__name__}: {exc}")
        return
    if result.error is not None:
        yield protocol.error_record(rid, result.error, partial=result)
    else:
        yield protocol.result_record(rid, result)


class Agent:
    """Accepts command lines, runs traces on ``max_parallel`` workers.

    ``sink`` callables receive response records; a sink that raises is
    considered disconnected and further records for it are dropped.
    """

    def __init__(self, backend, pps, max_parallel=1, clock=None):
        self.backend = backend
        self.state = AgentState(pps, clock=clock, max_parallel=max_parallel)
        self._pending_ids = set()
        self._workers = []
        self._done = threading.Event()

    def start(self):
        for i in range(self.state.max_parallel):
            t = threading.Thread(target=self._work, name=f"agent-worker-{i}", daemon=True)
            t.start()
            self._workers.append(t)
        return self

    @property
    def stopping(self):
        return self.state.stopping

    def submit(self, line, sink):
        """Process one request line. Never raises."""
        try:
            command = protocol.parse_command(line)
        except BadCommand as exc:
            _deliver(sink, protocol.error_record(exc.request_id, str(exc)))
            return None
        except Exception as exc:  # parser bug must not take the agent down
            log.exception("unexpected parse failure")
            _deliver(sink, protocol.error_record("?", f"internal error: {exc}"))
            return None

        st = self.state
        if command.kind is CommandKind.TRACE:
            with st.cond:
                if st.stopping:
                    rec = protocol.error_record(command.request_id, "agent shutting down")
                elif command.request_id in self._pending_ids:
                    rec = protocol.error_record(command.request_id, "duplicate request_id")
                else:
                    self._pending_ids.add(command.request_id)
                    st.queue.append((command, sink))
                    st.cond.notify()
                    return command
            _deliver(sink, rec)
            return None

        for rec in handle(command, st, self.backend):
            _deliver(sink, rec)
        if command.kind is CommandKind.QUIT:
            self._drop_queued()
        return command

    def _drop_queued(self):
        st = self.state
        with st.cond:
            dropped = list(st.queue)
            st.queue.clear()
            for cmd, _ in dropped:
                self._pending_ids.discard(cmd.request_id)
            st.cond.notify_all()
        for cmd, sink in dropped:
            _deliver(sink, protocol.error_record(cmd.request_id, "agent shutting down"))

    def _work(self):
        st = self.state
        while True:
            with st.cond:
                while not st.queue and not st.stopping:
                    st.cond.wait()
                if st.stopping:
                    return
                command, sink = st.queue.popleft()
                st.active += 1
            connected = True
            try:
                for rec in handle(command, st, self.backend):
                    if connected:
                        connected = _deliver(sink, rec)
            finally:
                with st.cond:
                    st.active -= 1
                    self._pending_ids.discard(command.request_id)
                    st.cond.notify_all()

    def wait_idle(self, timeout=None):
        """Block until no job is queued or running."""
        st = self.state
        with st.cond:
            return st.cond.wait_for(lambda: not st.queue and st.active == 0, timeout)

    def shutdown(self, timeout=None):
        """Drop queued jobs, let active ones finish, stop the workers."""
        with self.state.cond:
            self.state.stopping = True
            self.state.cond.notify_all()
        self._drop_queued()
        for t in self._workers:
            t.join(timeout)


def _deliver(sink, rec):
    try:
        sink(rec)
        return True
    except Exception:
        return False
