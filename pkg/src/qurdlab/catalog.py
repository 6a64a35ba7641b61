"""Builders for the reservation-model family: single machine, client nets,
two concurrent clients, Zeroconf and failure-detector extensions, the full
composed net, and the colored variant.

Composed nets use a uniform naming scheme so properties and trace labels
are unambiguous: per-job places/transitions carry ``@J``, per-machine ones
``@M`` and per-pair ones ``@(M,J)``.  The standalone machine net keeps the
plain names.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .colored import JOB, MACHINE, PAIR, ColoredNet, ColorUniverse, Inscription
from .tpn import Net

DEFAULT_TIMEOUT = 3

FAIL = "fail"
WAIT = "wait"


@dataclass
class CatalogParams:
    """Shape of a model instance: how many machines, which job demands,
    reservation semantics, timeout and optional extensions."""

    machine_count: int = 4
    job_demands: list = field(default_factory=lambda: [4])
    semantics: object = WAIT            # "fail" | "wait" | one per job
    timeout: object = DEFAULT_TIMEOUT   # None disables cancel entirely
    zeroconf: bool = False
    failure_detector: bool = False
    machine_ids: list = None
    job_ids: list = None

    def machines(self):
        if self.machine_ids is not None:
            return list(self.machine_ids)
        return [f"M{i + 1}" for i in range(self.machine_count)]

    def jobs(self):
        if self.job_ids is not None:
            return list(self.job_ids)
        return [f"J{i + 1}" for i in range(len(self.job_demands))]

    def semantics_of(self, index):
        if isinstance(self.semantics, str):
            return self.semantics
        return self.semantics[index]

    def validate(self):
        issues = []
        if self.machine_count < 1:
            issues.append("at least one machine required")
        if not self.job_demands:
            issues.append("at least one job required")
        for d in self.job_demands:
            if d < 1:
                issues.append(f"job demand {d} must be >= 1")
        for i in range(len(self.job_demands)):
            if self.semantics_of(i) not in (FAIL, WAIT):
                issues.append(f"unknown semantics {self.semantics_of(i)!r}")
        if self.timeout is not None and self.timeout < 1:
            issues.append("timeout must be >= 1 (or None)")
        return issues


def mname(base, m):
    return f"{base}@{m}"


def jname(base, j):
    return f"{base}@{j}"


def pname(base, m, j):
    return f"{base}@({m},{j})"


def split_pair(name):
    """Inverse of pname: 'running@(M1,J1)' -> ('running', 'M1', 'J1')."""
    base, _, suffix = name.partition("@")
    m, _, j = suffix.strip("()").partition(",")
    return base, m, j


def build_machine(timeout=DEFAULT_TIMEOUT):
    """Single daemon lifecycle net with plain place names.

    The client-side places (get_nodes, answered, launching_job,
    job_finished) are present but unmarked, so nothing is enabled until a
    client marking is supplied.
    """
    net = Net("machine")
    net.add_place("available", tokens=1)
    net.add_place("reserved")
    net.add_place("running")
    net.add_place("finished")
    for stub in ("get_nodes", "answered", "launching_job", "job_finished"):
        net.add_place(stub)
    net.add_transition("t1", pre={"available": 1, "get_nodes": 1},
                       post={"reserved": 1, "answered": 1})
    net.add_transition("t2", pre={"reserved": 1, "launching_job": 1},
                       post={"running": 1})
    net.add_transition("t3", pre={"running": 1}, post={"finished": 1})
    net.add_transition("t4", pre={"finished": 1},
                       post={"available": 1, "job_finished": 1})
    net.add_transition("cancel", pre={"reserved": 1, "answered": 1},
                       post={"available": 1, "get_nodes": 1},
                       interval=(timeout, None))
    return net


def build_net(params):
    """General composition: every machine crossed with every job."""
    issues = params.validate()
    if issues:
        raise ValueError("; ".join(issues))
    machines = params.machines()
    jobs = params.jobs()
    net = Net("composed")

    for j in jobs:
        net.add_place(jname("begin", j), tokens=1)
        for base in ("get_nodes", "answered", "launching_job",
                     "job_finished", "job_done"):
            net.add_place(jname(base, j))
    for m in machines:
        net.add_place(mname("available", m), tokens=1)
        if params.zeroconf:
            net.add_place(mname("not_available", m))
    for m in machines:
        for j in jobs:
            for base in ("reserved", "running", "finished"):
                net.add_place(pname(base, m, j))
    if params.failure_detector:
        for m in machines:
            net.add_place(mname("dead", m))
        for j in jobs:
            net.add_place(jname("failure_detector", j))

    for j, demand in zip(jobs, params.job_demands):
        net.add_transition(jname("start_job", j),
                           pre={jname("begin", j): 1},
                           post={jname("get_nodes", j): demand})
        net.add_transition(jname("launch", j),
                           pre={jname("answered", j): demand},
                           post={jname("launching_job", j): demand})
        net.add_transition(jname("t5", j),
                           pre={jname("job_finished", j): demand},
                           post={jname("job_done", j): 1})
    for m in machines:
        for i, j in enumerate(jobs):
            net.add_transition(pname("t1", m, j),
                               pre={mname("available", m): 1,
                                    jname("get_nodes", j): 1},
                               post={pname("reserved", m, j): 1,
                                     jname("answered", j): 1})
            net.add_transition(pname("t2", m, j),
                               pre={pname("reserved", m, j): 1,
                                    jname("launching_job", j): 1},
                               post={pname("running", m, j): 1})
            net.add_transition(pname("t3", m, j),
                               pre={pname("running", m, j): 1},
                               post={pname("finished", m, j): 1})
            net.add_transition(pname("t4", m, j),
                               pre={pname("finished", m, j): 1},
                               post={mname("available", m): 1,
                                     jname("job_finished", j): 1})
            if params.timeout is not None:
                post = {mname("available", m): 1}
                if params.semantics_of(i) == WAIT:
                    post[jname("get_nodes", j)] = 1
                net.add_transition(pname("cancel", m, j),
                                   pre={pname("reserved", m, j): 1,
                                        jname("answered", j): 1},
                                   post=post,
                                   interval=(params.timeout, None))
    if params.zeroconf:
        for m in machines:
            net.add_transition(mname("publish", m),
                               pre={mname("not_available", m): 1},
                               post={mname("available", m): 1})
            net.add_transition(mname("unpublish", m),
                               pre={mname("available", m): 1},
                               post={mname("not_available", m): 1})
    if params.failure_detector:
        for m in machines:
            for j in jobs:
                net.add_transition(pname("crash", m, j),
                                   pre={pname("running", m, j): 1},
                                   post={mname("dead", m): 1,
                                         jname("failure_detector", j): 1})
                net.add_transition(pname("continue", m, j),
                                   pre={mname("available", m): 1,
                                        jname("failure_detector", j): 1},
                                   post={pname("running", m, j): 1})
    return net


def build_client_net(params):
    """One client against params.machine_count machines."""
    if len(params.job_demands) != 1:
        raise ValueError("build_client_net takes exactly one job")
    return build_net(params)


def build_two_clients(params):
    """Two clients competing for the same machines."""
    if len(params.job_demands) != 2:
        raise ValueError("build_two_clients takes exactly two jobs")
    return build_net(params)


def build_full(params=None):
    """The complete composed model; defaults to 4 machines, one job of 4."""
    if params is None:
        params = CatalogParams()
    return build_net(params)


def _copy_net(net, name=None):
    out = Net(name or net.name)
    for p in net.places:
        out.add_place(p, tokens=net.initial.get(p, 0))
    for t in net.transitions:
        out.add_transition(t, pre=net.pre[t], post=net.post[t],
                           interval=net.interval[t])
    return out


def add_zeroconf(net):
    """Add per-machine not_available with publish/unpublish around available."""
    out = _copy_net(net, f"{net.name}+zeroconf")
    targets = [p for p in net.places
               if p == "available" or p.startswith("available@")]
    if not targets:
        raise ValueError("net has no available places")
    for avail in targets:
        suffix = avail[len("available"):]
        out.add_place(f"not_available{suffix}")
        out.add_transition(f"publish{suffix}",
                           pre={f"not_available{suffix}": 1},
                           post={avail: 1})
        out.add_transition(f"unpublish{suffix}",
                           pre={avail: 1},
                           post={f"not_available{suffix}": 1})
    return out


def add_failure_detector(net):
    """Add crash (running -> dead + detector) and continue (available +
    detector -> running) around every running place."""
    out = _copy_net(net, f"{net.name}+fd")
    targets = [p for p in net.places
               if p == "running" or p.startswith("running@")]
    if not targets:
        raise ValueError("net has no running places")
    added = set()
    for run in targets:
        if run == "running":
            dead, detector, avail = "dead", "failure_detector", "available"
            crash, cont = "crash", "continue"
        else:
            _, m, j = split_pair(run)
            dead, detector = mname("dead", m), jname("failure_detector", j)
            avail = mname("available", m)
            crash, cont = pname("crash", m, j), pname("continue", m, j)
        for p in (dead, detector):
            if p not in added:
                added.add(p)
                out.add_place(p)
        out.add_transition(crash, pre={run: 1},
                           post={dead: 1, detector: 1})
        out.add_transition(cont, pre={avail: 1, detector: 1},
                           post={run: 1})
    return out


def build_colored(universe, params=None):
    """The colored model over a universe of machines and jobs.

    The continue transition produces a pair token in running (the only
    sort-correct reading).  With mixed per-job semantics the single
    colored cancel uses the wait shape (token returned to get_nodes);
    it drops the token only when every job uses fail semantics.
    """
    if params is None:
        params = CatalogParams(machine_count=len(universe.machines),
                               job_demands=[universe.demand[j] for j in universe.jobs])
    cnet = ColoredNet(universe)
    m_, j_, mj = Inscription("m"), Inscription("j"), Inscription("mj")
    pj = Inscription("j", per_demand=True)

    cnet.add_place("begin", JOB, tokens=universe.jobs)
    cnet.add_place("get_nodes", JOB)
    cnet.add_place("answered", JOB)
    cnet.add_place("launching_job", JOB)
    cnet.add_place("job_finished", JOB)
    cnet.add_place("job_done", JOB)
    cnet.add_place("available", MACHINE, tokens=universe.machines)
    if params.zeroconf:
        cnet.add_place("not_available", MACHINE)
    cnet.add_place("reserved", PAIR)
    cnet.add_place("running", PAIR)
    cnet.add_place("finished", PAIR)
    if params.failure_detector:
        cnet.add_place("dead", MACHINE)
        cnet.add_place("failure_detector", JOB)

    cnet.add_transition("start_job", pre={"begin": j_}, post={"get_nodes": pj})
    cnet.add_transition("launch", pre={"answered": pj}, post={"launching_job": pj})
    cnet.add_transition("t5", pre={"job_finished": pj}, post={"job_done": j_})
    cnet.add_transition("t1", pre={"available": m_, "get_nodes": j_},
                        post={"reserved": mj, "answered": j_})
    cnet.add_transition("t2", pre={"reserved": mj, "launching_job": j_},
                        post={"running": mj})
    cnet.add_transition("t3", pre={"running": mj}, post={"finished": mj})
    cnet.add_transition("t4", pre={"finished": mj},
                        post={"available": m_, "job_finished": j_})
    if params.timeout is not None:
        all_fail = all(params.semantics_of(i) == FAIL
                       for i in range(len(params.job_demands)))
        post = {"available": m_}
        if not all_fail:
            post["get_nodes"] = j_
        cnet.add_transition("cancel", pre={"reserved": mj, "answered": j_},
                            post=post, interval=(params.timeout, None))
    if params.zeroconf:
        cnet.add_transition("publish", pre={"not_available": m_},
                            post={"available": m_})
        cnet.add_transition("unpublish", pre={"available": m_},
                            post={"not_available": m_})
    if params.failure_detector:
        cnet.add_transition("crash", pre={"running": mj},
                            post={"dead": m_, "failure_detector": j_})
        cnet.add_transition("continue", pre={"available": m_, "failure_detector": j_},
                            post={"running": mj})
    return cnet


def universe_for(params):
    """ColorUniverse matching a CatalogParams instance."""
    jobs = params.jobs()
    return ColorUniverse(params.machines(), jobs,
                         {j: d for j, d in zip(jobs, params.job_demands)})
