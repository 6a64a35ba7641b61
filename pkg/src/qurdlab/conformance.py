"""Trace conformance: every protocol run must be a firing sequence of the
colored reservation net.

Protocol events are projected onto colored transitions through an explicit
event map (events without a net counterpart, like KO replies and bus
notifications, are declared internal); the projection is then replayed
untimed from the net's initial marking, checking enabling only.  A run
conforms when every projected event fires and the final number of job_done
tokens equals the number of completed jobs in the trace.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import colored as cpn
from .catalog import (DEFAULT_TIMEOUT, FAIL, WAIT, CatalogParams,
                      build_colored, universe_for)
from .simulator import SimConfig, TraceEvent, run


class UnknownEvent(Exception):
    """A trace event kind that is neither mapped nor declared internal."""


DEFAULT_MAPPING = {
    "job-submitted": "start_job",
    "ok-sent": "t1",
    "launch": "launch",
    "job-accepted": "t2",
    "process-finished": "t3",
    "done-sent": "t4",
    "job-done": "t5",
    "canceled": "cancel",
    "crashed": "crash",
    "restarted": "continue",
}

DEFAULT_INTERNAL = frozenset({
    "published", "unpublished", "reserve-sent", "ko-sent", "released",
    "refused", "suspected", "failed", "crashed-idle", "restart-waiting",
    "killed",
})


@dataclass
class EventMap:
    mapping: dict = field(default_factory=lambda: dict(DEFAULT_MAPPING))
    internal: frozenset = DEFAULT_INTERNAL


@dataclass
class ReplayReport:
    ok: bool
    index: int = None               # first diverging step
    label: tuple = None             # (transition, binding) that failed
    marking: dict = None            # blocking marking
    final_marking: dict = None

    def __str__(self):
        if self.ok:
            return "replay ok"
        return (f"divergence at step {self.index}: {self.label[0]}"
                f"{self.label[1]} not enabled")


def project(trace, event_map=None):
    """Order-preserving projection of a trace onto (transition, binding)
    pairs, dropping internal events."""
    event_map = event_map or EventMap()
    out = []
    for ev in trace:
        if ev.kind in event_map.mapping:
            out.append((event_map.mapping[ev.kind],
                        cpn.Binding(ev.machine, ev.job)))
        elif ev.kind not in event_map.internal:
            raise UnknownEvent(ev.kind)
    return out


def replay(projected, cnet):
    """Fire the projected sequence from the initial colored marking,
    untimed; divergences are reported, not raised."""
    marking = cnet.initial_marking()
    for i, (t, b) in enumerate(projected):
        if not cpn.binding_enabled(cnet, marking, t, b):
            return ReplayReport(False, index=i, label=(t, b), marking=marking)
        marking = cpn.colored_fire(cnet, marking, t, b)
    return ReplayReport(True, final_marking=marking)


def conformance_net(params, crashes=()):
    """Colored net matching a scenario for replay purposes.

    The failure-detector layer is present whenever the schedule can crash
    a machine, since crash events then appear in traces.  The cancel
    transition is present whenever a fail-semantics job exists even with
    the timeout off: giving machines back on failure maps to cancel, and
    untimed replay ignores the interval anyway.
    """
    any_fail = any(params.semantics_of(i) == FAIL
                   for i in range(len(params.job_demands)))
    timeout = params.timeout
    if timeout is None and any_fail:
        timeout = DEFAULT_TIMEOUT
    params = CatalogParams(
        machine_count=params.machine_count,
        job_demands=list(params.job_demands),
        semantics=params.semantics,
        timeout=timeout,
        zeroconf=params.zeroconf,
        failure_detector=params.failure_detector or bool(crashes),
        machine_ids=params.machine_ids,
        job_ids=params.job_ids,
    )
    return build_colored(universe_for(params), params)


def check_run(params, config, event_map=None):
    """Simulate, project, replay; returns (SimResult, ReplayReport).

    On a clean replay the job_done count is also required to match the
    number of completed jobs in the trace."""
    result = run(params, config)
    cnet = conformance_net(params, config.crashes)
    report = replay(project(result.trace, event_map), cnet)
    if report.ok:
        done_events = sum(1 for e in result.trace if e.kind == "job-done")
        done_tokens = len(report.final_marking.get("job_done", ()))
        if done_tokens != done_events:
            report = ReplayReport(False, index=len(result.trace),
                                  label=("t5", None),
                                  marking=report.final_marking)
    return result, report


@dataclass
class FuzzSummary:
    passed: int
    failed: int
    failures: list                  # (case seed, description, report)

    def __str__(self):
        total = self.passed + self.failed
        if not self.failed:
            return f"{self.passed}/{total} traces conform"
        lines = [f"{self.passed}/{total} traces conform; failures:"]
        lines += [f"  seed {s}: {d}: {r}" for s, d, r in self.failures]
        return "\n".join(lines)


def random_case(rng):
    """One random scenario from the default fuzz space: 1-4 machines,
    1-2 jobs with demands 1-3, mixed semantics, optional timeout, crash
    and extensions, small latencies."""
    machines = rng.randint(1, 4)
    jobs = rng.randint(1, 2)
    demands = [rng.randint(1, 3) for _ in range(jobs)]
    semantics = [rng.choice((FAIL, WAIT)) for _ in range(jobs)]
    timeout = rng.choice((None, 3))
    crashes = []
    if rng.random() < 0.5:
        crashes.append((f"M{rng.randint(1, machines)}", rng.randint(0, 8)))
    params = CatalogParams(
        machine_count=machines,
        job_demands=demands,
        semantics=semantics,
        timeout=timeout,
        zeroconf=rng.random() < 0.3,
        failure_detector=bool(crashes) and rng.random() < 0.7,
    )
    config = SimConfig(
        bus_latency=rng.randint(0, 2),
        msg_latency=rng.randint(0, 2),
        timeout=timeout,
        job_duration=rng.randint(1, 3),
        crashes=crashes,
        seed=rng.randint(0, 2**32 - 1),
    )
    return params, config


def fuzz_conformance(count, seed=0, event_map=None):
    """Replay ``count`` randomized scenarios; failing case seeds are
    reported so a case can be reproduced with random_case(Random(s))."""
    passed, failures = 0, []
    for k in range(count):
        case_seed = seed * 1_000_003 + k
        rng = random.Random(case_seed)
        params, config = random_case(rng)
        desc = (f"{params.machine_count}m demands={params.job_demands} "
                f"sem={params.semantics} timeout={params.timeout} "
                f"crashes={config.crashes} fd={params.failure_detector} "
                f"lat=({config.bus_latency},{config.msg_latency}) "
                f"dur={config.job_duration}")
        _, report = check_run(params, config, event_map)
        if report.ok:
            passed += 1
        else:
            failures.append((case_seed, desc, report))
    return FuzzSummary(passed, len(failures), failures)


def parse_trace(text):
    """Parse the line format produced by SimResult.trace_text."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3 or not parts[0].startswith("t="):
            raise ValueError(f"trace line {lineno}: cannot parse {raw!r}")
        time = int(parts[0][2:])
        actor, kind = parts[1], parts[2]
        machine = job = None
        for extra in parts[3:]:
            key, _, value = extra.partition("=")
            if key == "machine":
                machine = value
            elif key == "job":
                job = value
            else:
                raise ValueError(f"trace line {lineno}: unknown field {key!r}")
        events.append(TraceEvent(time, actor, kind, machine, job))
    return events
