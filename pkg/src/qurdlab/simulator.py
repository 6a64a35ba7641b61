"""Discrete-event simulation of the reservation protocol.

One launcher actor per job runs the reservation algorithm (fail or wait
semantics); one daemon actor per machine runs the resource side.  They
exchange RESERVE/OK/KO/JOB/RELEASE/DONE messages over reliable FIFO links
with a fixed latency, and discover each other through a virtual service
bus: daemons publish and unpublish themselves, subscribers hear about it
one bus latency later.  Crashes silence a daemon; an optional
failure-detector oracle notices a crashed running machine after a
detection delay and restarts the process on the lowest-id available
daemon (queueing the request if none is free).

The whole simulation is a pure function of (parameters, config): events
at equal times are ordered crash < timer < delivery, then by scheduling
sequence number, and the seed only shuffles job submission order.  The
result is an outcome per job plus the protocol trace consumed by the
conformance checker.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

CRASH_PRIO = 0
TIMER_PRIO = 1
DELIVER_PRIO = 2

DISCOVERING = "discovering"
LAUNCHING = "launching"
DONE = "done"
FAILED = "failed"


class InvalidScenario(ValueError):
    pass


@dataclass
class SimConfig:
    """Timing and fault parameters of one simulation run."""

    bus_latency: int = 1
    msg_latency: int = 1
    timeout: object = 3              # reservation timeout, None = no timers
    job_duration: int = 2
    crashes: list = field(default_factory=list)        # (machine id, time)
    seed: int = 0
    detect_delay: int = 1            # failure-detector reaction time
    horizon: int = 1000              # hard stop for the event loop
    launcher_kills: list = field(default_factory=list)  # (job id, time)


@dataclass
class TraceEvent:
    time: int
    actor: str
    kind: str
    machine: str = None
    job: str = None

    def line(self):
        parts = [f"t={self.time}", self.actor, self.kind]
        if self.machine is not None:
            parts.append(f"machine={self.machine}")
        if self.job is not None:
            parts.append(f"job={self.job}")
        return " ".join(parts)


@dataclass
class Message:
    kind: str                       # RESERVE OK KO JOB RELEASE DONE
    src: str
    dst: str
    job: str
    suspected: bool = False         # synthesized KO from the detector


@dataclass
class SimResult:
    outcomes: dict                  # job id -> completed|failed|timed-out|killed
    trace: list

    def trace_text(self):
        return "".join(e.line() + "\n" for e in self.trace)


class Daemon:
    """Per-machine resource daemon: available -> reserved -> running."""

    def __init__(self, sim, name):
        self.sim = sim
        self.name = name
        self.state = "available"
        self.client = None          # reserving/running job id
        self.published = True
        self.crashed = False
        self.epoch = 0              # bumped on every state change
        self.expiry_at = None       # deadline of the current reservation
        self.doomed = None          # reservation pending cancel after a crash

    def on_message(self, msg):
        sim = self.sim
        if msg.kind == "RESERVE":
            if self.state == "available":
                self.state = "reserved"
                self.client = msg.job
                self.epoch += 1
                sim.bus_unpublish(self)
                sim.emit(self.name, "ok-sent", machine=self.name, job=msg.job)
                sim.send(self.name, msg.src, "OK", msg.job)
                if sim.config.timeout is not None:
                    # the launcher-side timer runs at ok-receipt + timeout;
                    # allow one more hop so a JOB sent just before that
                    # deadline still lands before the daemon gives up
                    self.expiry_at = (sim.now + sim.config.timeout
                                      + 2 * sim.config.msg_latency)
                    sim.timer(self.expiry_at,
                              ("daemon-expiry", self.name, self.epoch))
            else:
                sim.emit(self.name, "ko-sent", machine=self.name, job=msg.job)
                sim.send(self.name, msg.src, "KO", msg.job)
        elif msg.kind == "JOB":
            if self.state == "reserved" and msg.job == self.client:
                self.state = "running"
                self.epoch += 1
                sim.emit(self.name, "job-accepted", machine=self.name, job=msg.job)
                sim.timer(sim.now + sim.config.job_duration,
                          ("complete", self.name, self.epoch))
            else:
                sim.emit(self.name, "refused", machine=self.name, job=msg.job)
        elif msg.kind == "RELEASE":
            # only the reserving client may free the machine; a stale
            # RELEASE after re-reservation must not evict a third party
            if self.state == "reserved" and msg.job == self.client:
                job = self.client
                # cancel first: becoming available may immediately hand the
                # machine to a failure-detector restart
                sim.emit(self.name, "canceled", machine=self.name, job=job)
                self.become_available()

    def expire(self, epoch):
        if self.crashed or self.state != "reserved" or epoch != self.epoch:
            return
        job = self.client
        self.sim.emit(self.name, "canceled", machine=self.name, job=job)
        self.become_available()

    def expire_doomed(self, epoch):
        # a machine that died holding a reservation still loses it at the
        # original deadline; the launcher's books must see the same cancel
        if epoch != self.epoch or self.doomed is None:
            return
        job, self.doomed = self.doomed, None
        self.sim.emit(self.name, "canceled", machine=self.name, job=job)

    def complete(self, epoch):
        if self.crashed or self.state != "running" or epoch != self.epoch:
            return
        sim = self.sim
        job = self.client
        sim.emit(self.name, "process-finished", machine=self.name, job=job)
        sim.emit(self.name, "done-sent", machine=self.name, job=job)
        sim.send(self.name, job, "DONE", job)
        self.become_available()

    def become_available(self):
        self.state = "available"
        self.client = None
        self.epoch += 1
        self.sim.bus_publish(self)
        self.sim.detector_offer(self)


class Launcher:
    """Per-job reservation actor (Algorithm 2 fail / Algorithm 3 wait style)."""

    def __init__(self, sim, job, needed, semantics):
        self.sim = sim
        self.job = job
        self.needed = needed
        self.semantics = semantics
        self.phase = DISCOVERING
        self.discovered = []        # believed-published machines, arrival order
        self.contacted = set()
        self.pending = set()        # machines with a RESERVE awaiting reply
        self.machines = []          # reserved machines
        self.res_epoch = {}         # machine -> reservation generation
        self.oks = 0                # positive answers ever received
        self.done_count = 0
        self.dead = False

    def on_bus(self, op, machine):
        if op == "add":
            if machine not in self.discovered:
                self.discovered.append(machine)
            if self.semantics == "wait":
                # a fresh publish makes the machine worth re-contacting;
                # fail semantics keeps its single pass over each machine
                self.contacted.discard(machine)
        else:
            if machine in self.discovered:
                self.discovered.remove(machine)

    def on_message(self, msg):
        sim = self.sim
        if msg.kind == "OK":
            self.pending.discard(msg.src)
            if self.phase != DISCOVERING:
                return
            self.oks += 1
            self.machines.append(msg.src)
            self.res_epoch[msg.src] = self.res_epoch.get(msg.src, 0) + 1
            if sim.config.timeout is not None:
                sim.timer(sim.now + sim.config.timeout,
                          ("launcher-timeout", self.job, msg.src,
                           self.res_epoch[msg.src]))
            if len(self.machines) == self.needed:
                self.phase = LAUNCHING
                sim.emit(self.job, "launch", job=self.job)
                for m in self.machines:
                    sim.send(self.job, m, "JOB", self.job)
        elif msg.kind == "KO":
            if msg.suspected:
                sim.emit(self.job, "suspected", machine=msg.src, job=self.job)
            self.pending.discard(msg.src)
        elif msg.kind == "DONE":
            if self.phase != LAUNCHING:
                return
            self.done_count += 1
            if self.done_count == self.needed:
                self.phase = DONE
                sim.emit(self.job, "job-done", job=self.job)

    def unbook(self, machine, epoch):
        """Reservation timer: give the machine up if the job has not
        launched by now (the daemon side expires simultaneously)."""
        if self.dead or self.phase != DISCOVERING:
            return
        if machine not in self.machines or self.res_epoch.get(machine) != epoch:
            return
        self.machines.remove(machine)
        self.sim.emit(self.job, "released", machine=machine, job=self.job)
        self.sim.send(self.job, machine, "RELEASE", self.job)
        self.step()

    def step(self):
        """Contact candidate machines, keeping as many RESERVEs in flight as
        reservations are still missing, so positive answers never exceed
        the demand.  Under fail semantics the budget counts every OK ever
        received (a reservation given up to the timeout is not replaced:
        the single-pass algorithm fails instead); fail semantics gives up
        once discovery is exhausted."""
        if self.dead or self.phase != DISCOVERING:
            return
        if self.semantics == "fail":
            window = self.needed - self.oks - len(self.pending)
        else:
            window = self.needed - len(self.machines) - len(self.pending)
        for m in self.discovered:
            if window <= 0:
                break
            if m not in self.contacted and m not in self.machines:
                self.contacted.add(m)
                self.pending.add(m)
                window -= 1
                self.sim.emit(self.job, "reserve-sent", machine=m, job=self.job)
                self.sim.send(self.job, m, "RESERVE", self.job)
        if self.pending or len(self.machines) >= self.needed:
            return
        if self.semantics != "fail":
            return
        can_grow = (self.needed - self.oks > 0
                    and not self.sim.all_discovered_by(self))
        if can_grow:
            return
        for m in self.machines:
            self.sim.emit(self.job, "released", machine=m, job=self.job)
            self.sim.send(self.job, m, "RELEASE", self.job)
        self.machines.clear()
        self.phase = FAILED
        self.sim.emit(self.job, "failed", job=self.job)


class Simulation:
    def __init__(self, params, config):
        self.params = params
        self.config = config
        self.now = 0
        self.seq = 0
        self.heap = []
        self.trace = []
        machines = params.machines()
        jobs = params.jobs()
        if len(set(jobs)) != len(jobs):
            raise InvalidScenario("duplicate job ids")
        overlap = set(jobs) & set(machines)
        if overlap:
            raise InvalidScenario(
                f"job ids collide with machine ids: {sorted(overlap)}")
        self.daemons = {m: Daemon(self, m) for m in machines}
        self.launchers = {}
        for i, (j, d) in enumerate(zip(jobs, params.job_demands)):
            self.launchers[j] = Launcher(self, j, d, params.semantics_of(i))
        self.machine_order = machines
        self.restart_queue = []      # jobs waiting for a machine to restart on
        self._check_config()

    def _check_config(self):
        c = self.config
        if c.bus_latency < 0 or c.msg_latency < 0:
            raise InvalidScenario("latencies must be nonnegative")
        if c.job_duration < 1:
            raise InvalidScenario("job duration must be >= 1")
        if c.timeout is not None and c.timeout < 1:
            raise InvalidScenario("timeout must be >= 1 (or None)")
        if c.horizon < 0:
            raise InvalidScenario("horizon must be nonnegative")
        for m, t in c.crashes:
            if m not in self.daemons:
                raise InvalidScenario(f"unknown machine in crash schedule: {m}")
            if t < 0:
                raise InvalidScenario("crash times must be nonnegative")
        for j, t in c.launcher_kills:
            if j not in self.launchers:
                raise InvalidScenario(f"unknown job in kill schedule: {j}")

    # -- plumbing ---------------------------------------------------------

    def schedule(self, time, prio, payload):
        heapq.heappush(self.heap, (time, prio, self.seq, payload))
        self.seq += 1

    def timer(self, time, payload):
        self.schedule(time, TIMER_PRIO, payload)

    def send(self, src, dst, kind, job, delay=None, suspected=False):
        if delay is None:
            delay = self.config.msg_latency
        self.schedule(self.now + delay, DELIVER_PRIO,
                      ("msg", Message(kind, src, dst, job, suspected)))

    def emit(self, actor, kind, machine=None, job=None):
        self.trace.append(TraceEvent(self.now, actor, kind, machine, job))

    def bus_publish(self, daemon):
        daemon.published = True
        self.emit(daemon.name, "published", machine=daemon.name)
        for j in self.launchers:
            self.schedule(self.now + self.config.bus_latency, DELIVER_PRIO,
                          ("bus", "add", daemon.name, j))

    def bus_unpublish(self, daemon):
        daemon.published = False
        self.emit(daemon.name, "unpublished", machine=daemon.name)
        for j in self.launchers:
            self.schedule(self.now + self.config.bus_latency, DELIVER_PRIO,
                          ("bus", "remove", daemon.name, j))

    def all_discovered_by(self, launcher):
        """No published machine remains unknown to the launcher, so fail
        semantics cannot hope for a further discovery."""
        return all(not d.published or d.name in launcher.discovered
                   for d in self.daemons.values())

    # -- failure detector ---------------------------------------------------

    def detect(self, job):
        for m in self.machine_order:
            d = self.daemons[m]
            if not d.crashed and d.state == "available":
                self.restart_on(d, job)
                return
        self.restart_queue.append(job)
        self.emit("detector", "restart-waiting", job=job)

    def restart_on(self, daemon, job):
        daemon.state = "running"
        daemon.client = job
        daemon.epoch += 1
        self.bus_unpublish(daemon)
        self.emit("detector", "restarted", machine=daemon.name, job=job)
        self.timer(self.now + self.config.job_duration,
                   ("complete", daemon.name, daemon.epoch))

    def detector_offer(self, daemon):
        """A machine just became available; serve a queued restart if any."""
        if self.restart_queue and not daemon.crashed:
            job = self.restart_queue.pop(0)
            self.restart_on(daemon, job)

    # -- event handlers -----------------------------------------------------

    def handle(self, payload):
        kind = payload[0]
        if kind == "msg":
            msg = payload[1]
            if msg.dst in self.daemons:
                d = self.daemons[msg.dst]
                if d.crashed:
                    if msg.kind == "RESERVE":
                        # the eventually-perfect detector answers for the
                        # dead machine so the launcher is not stuck forever
                        self.send(msg.dst, msg.src, "KO", msg.job,
                                  delay=self.config.detect_delay +
                                  self.config.msg_latency,
                                  suspected=True)
                    elif msg.kind == "JOB" and msg.job == d.doomed:
                        # the launch beat the reservation deadline, so the
                        # reservation was consumed, not canceled
                        d.doomed = None
                    return
                d.on_message(msg)
            else:
                launcher = self.launchers[msg.dst]
                if launcher.dead:
                    return
                launcher.on_message(msg)
                launcher.step()
        elif kind == "bus":
            _, op, machine, j = payload
            launcher = self.launchers[j]
            if launcher.dead:
                return
            launcher.on_bus(op, machine)
            launcher.step()
        elif kind == "submit":
            job = payload[1]
            self.emit(job, "job-submitted", job=job)
            for m in self.machine_order:
                if self.daemons[m].published:
                    self.schedule(self.now + self.config.bus_latency,
                                  DELIVER_PRIO, ("bus", "add", m, job))
            self.launchers[job].step()
        elif kind == "daemon-expiry":
            _, m, epoch = payload
            self.daemons[m].expire(epoch)
        elif kind == "doomed-expiry":
            _, m, epoch = payload
            self.daemons[m].expire_doomed(epoch)
        elif kind == "complete":
            _, m, epoch = payload
            self.daemons[m].complete(epoch)
        elif kind == "launcher-timeout":
            _, j, m, epoch = payload
            self.launchers[j].unbook(m, epoch)
        elif kind == "detect":
            self.detect(payload[1])
        elif kind == "crash":
            self.crash(payload[1])
        elif kind == "kill":
            job = payload[1]
            self.launchers[job].dead = True
            self.emit(job, "killed", job=job)

    def crash(self, name):
        d = self.daemons[name]
        if d.crashed:
            return
        d.crashed = True
        was, job = d.state, d.client
        d.epoch += 1
        if d.published:
            self.bus_unpublish(d)
        if was == "running":
            self.emit(name, "crashed", machine=name, job=job)
            if self.params.failure_detector:
                self.timer(self.now + self.config.detect_delay, ("detect", job))
        else:
            if was == "reserved" and d.expiry_at is not None:
                d.doomed = job
                self.timer(d.expiry_at, ("doomed-expiry", name, d.epoch))
            self.emit(name, "crashed-idle", machine=name)

    def run(self):
        rng = random.Random(self.config.seed)
        order = list(self.launchers)
        rng.shuffle(order)
        for j in order:
            self.schedule(0, DELIVER_PRIO, ("submit", j))
        for m, t in self.config.crashes:
            self.schedule(t, CRASH_PRIO, ("crash", m))
        for j, t in self.config.launcher_kills:
            self.schedule(t, CRASH_PRIO, ("kill", j))
        while self.heap:
            time, _, _, payload = heapq.heappop(self.heap)
            if time > self.config.horizon:
                break
            self.now = time
            self.handle(payload)
        outcomes = {}
        for j, launcher in self.launchers.items():
            if launcher.phase == DONE:
                outcomes[j] = "completed"
            elif launcher.phase == FAILED:
                outcomes[j] = "failed"
            elif launcher.dead:
                outcomes[j] = "killed"
            else:
                outcomes[j] = "timed-out"
        return SimResult(outcomes, self.trace)


def run(params, config=None):
    """Simulate the protocol for a model configuration; deterministic for
    fixed (params, config)."""
    if config is None:
        config = SimConfig()
    issues = params.validate()
    if issues:
        raise InvalidScenario("; ".join(issues))
    return Simulation(params, config).run()
