"""Protocol simulator: outcomes, trace shape, determinism, failure paths.

Several assertions scan the emitted trace instead of poking simulator
internals, because the trace is the module's actual contract.
"""

import pytest

from qurdlab.catalog import CatalogParams
from qurdlab.simulator import InvalidScenario, SimConfig, run


def events(result, kind, machine=None, job=None):
    return [e for e in result.trace
            if e.kind == kind
            and (machine is None or e.machine == machine)
            and (job is None or e.job == job)]


# -- outcomes -----------------------------------------------------------------

def test_happy_path_four_daemons():
    r = run(CatalogParams())
    assert r.outcomes == {"J1": "completed"}
    done = [e.kind for e in r.trace if e.kind in ("done-sent", "job-done")]
    assert done == ["done-sent"] * 4 + ["job-done"]


def test_fail_semantics_gives_up():
    p = CatalogParams(machine_count=1, job_demands=[2], semantics="fail")
    r = run(p)
    assert r.outcomes == {"J1": "failed"}
    assert events(r, "released", machine="M1")
    # the daemon frees the reservation and republishes
    assert events(r, "canceled", machine="M1")
    assert r.trace[-1].time <= 20


def test_wait_semantics_shares_one_daemon():
    p = CatalogParams(machine_count=1, job_demands=[1, 1], semantics="wait")
    for seed in range(4):
        r = run(p, SimConfig(seed=seed))
        assert r.outcomes == {"J1": "completed", "J2": "completed"}, seed
        accepted = events(r, "job-accepted")
        assert len(accepted) == 2
        # second acceptance only after the first run finished
        finished = events(r, "process-finished")
        assert finished[0].time <= accepted[1].time


def test_oversubscribed_wait_times_out():
    p = CatalogParams(machine_count=1, job_demands=[2], semantics="wait")
    r = run(p, SimConfig(horizon=60))
    assert r.outcomes == {"J1": "timed-out"}


# -- trace grammar ---------------------------------------------------------------

def test_trace_line_format():
    r = run(CatalogParams(machine_count=1, job_demands=[1]))
    text = r.trace_text()
    assert text.splitlines()[0] == "t=0 J1 job-submitted job=J1"
    for line in text.splitlines():
        assert line.startswith("t=")
        fields = line.split()
        assert int(fields[0][2:]) >= 0
        assert all("=" in f for f in fields[3:])


def test_determinism_byte_for_byte():
    p = CatalogParams(machine_count=3, job_demands=[2, 1],
                      semantics=["wait", "fail"])
    c = SimConfig(seed=9, crashes=[("M2", 4)])
    p2 = CatalogParams(machine_count=3, job_demands=[2, 1],
                       semantics=["wait", "fail"])
    a = run(p, c).trace_text()
    b = run(p2, SimConfig(seed=9, crashes=[("M2", 4)])).trace_text()
    assert a == b


def test_seed_changes_submission_order():
    p = CatalogParams(machine_count=2, job_demands=[1, 1])
    texts = {run(p, SimConfig(seed=s)).trace_text() for s in range(6)}
    assert len(texts) > 1


# -- daemon behavior ------------------------------------------------------------

def test_ok_unique_between_availability_windows():
    p = CatalogParams(machine_count=2, job_demands=[1, 1, 1],
                      job_ids=["Ja", "Jb", "Jc"])
    r = run(p, SimConfig(seed=3))
    for m in ("M1", "M2"):
        window = 0
        for e in r.trace:
            if e.machine != m:
                continue
            if e.kind == "ok-sent":
                window += 1
                assert window == 1, "second OK without becoming available"
            elif e.kind in ("canceled", "done-sent"):
                window = 0


def test_daemon_serves_one_job_at_a_time():
    p = CatalogParams(machine_count=2, job_demands=[1, 1])
    r = run(p, SimConfig(seed=1))
    holder = {}
    for e in r.trace:
        if e.kind == "ok-sent":
            assert holder.get(e.machine) is None
            holder[e.machine] = e.job
        elif e.kind in ("canceled", "done-sent") and e.machine in holder:
            holder[e.machine] = None


def test_reserved_daemon_answers_ko():
    p = CatalogParams(machine_count=1, job_demands=[1, 1])
    r = run(p)
    assert events(r, "ko-sent")


# -- crashes ---------------------------------------------------------------------

def test_crash_running_machine_recovers_on_spare():
    p = CatalogParams(machine_count=2, job_demands=[1],
                      failure_detector=True)
    r = run(p, SimConfig(crashes=[("M1", 5)]))
    assert r.outcomes == {"J1": "completed"}
    assert events(r, "crashed", machine="M1")
    assert events(r, "restarted", machine="M2")


def test_crash_idle_daemon_harmless():
    p = CatalogParams(machine_count=2, job_demands=[1],
                      failure_detector=True)
    r = run(p, SimConfig(crashes=[("M2", 1)]))
    assert r.outcomes == {"J1": "completed"}
    assert events(r, "crashed-idle", machine="M2")


def test_crash_without_detector_strands_job():
    p = CatalogParams(machine_count=2, job_demands=[1])
    r = run(p, SimConfig(crashes=[("M1", 5)], horizon=80))
    assert r.outcomes == {"J1": "timed-out"}


def test_crash_while_reserved_cancels_at_deadline():
    # demand 3 on 2 machines never launches, so the machine that crashes
    # while reserved still loses the reservation at
    # reserve + timeout + 2 * msg latency
    p = CatalogParams(machine_count=2, job_demands=[3])
    c = SimConfig(crashes=[("M1", 3)], horizon=40)
    r = run(p, c)
    ok = events(r, "ok-sent", machine="M1")[0]
    cancel = events(r, "canceled", machine="M1")
    assert cancel and cancel[0].time == ok.time + 3 + 2


def test_crash_while_reserved_with_job_in_flight_keeps_reservation():
    # both answers arrive and the launch goes out before the deadline, so
    # the dead machine's reservation is consumed, never canceled
    p = CatalogParams(machine_count=2, job_demands=[2])
    c = SimConfig(crashes=[("M1", 3)], horizon=40)
    r = run(p, c)
    assert events(r, "launch")
    assert not events(r, "canceled", machine="M1")
    assert r.outcomes == {"J1": "timed-out"}


def test_restart_waits_for_available_machine():
    p = CatalogParams(machine_count=1, job_demands=[1],
                      failure_detector=True)
    r = run(p, SimConfig(crashes=[("M1", 5)], horizon=60))
    assert r.outcomes == {"J1": "timed-out"}
    assert events(r, "restart-waiting")


# -- launcher volatility -----------------------------------------------------------

def test_killed_launcher_reservations_expire():
    p = CatalogParams(machine_count=3, job_demands=[3])
    c = SimConfig(launcher_kills=[("J1", 3)])
    r = run(p, c)
    assert r.outcomes == {"J1": "killed"}
    oks = events(r, "ok-sent")
    assert oks
    deadline = 3 + c.timeout + 2 * c.msg_latency
    for ok in oks:
        cancels = events(r, "canceled", machine=ok.machine)
        assert cancels and cancels[0].time <= deadline
        assert cancels[0].time == ok.time + c.timeout + 2 * c.msg_latency


# -- liveness --------------------------------------------------------------------

def test_desk_scale_liveness():
    for mc, demands in ((2, [2]), (3, [2, 1]), (4, [2, 2])):
        p = CatalogParams(machine_count=mc, job_demands=demands)
        r = run(p, SimConfig(horizon=200))
        assert all(o == "completed" for o in r.outcomes.values()), (mc, demands)
        assert max(e.time for e in r.trace) <= 60


# -- scenario validation ------------------------------------------------------------

def test_invalid_scenarios_rejected():
    good = CatalogParams(machine_count=1, job_demands=[1])
    with pytest.raises(InvalidScenario):
        run(good, SimConfig(bus_latency=-1))
    with pytest.raises(InvalidScenario):
        run(good, SimConfig(job_duration=0))
    with pytest.raises(InvalidScenario):
        run(good, SimConfig(crashes=[("M9", 1)]))
    with pytest.raises(InvalidScenario):
        run(good, SimConfig(launcher_kills=[("J9", 1)]))
    with pytest.raises(InvalidScenario):
        run(CatalogParams(machine_count=1, job_demands=[1],
                          job_ids=["M1"]))
    with pytest.raises(InvalidScenario):
        run(CatalogParams(machine_count=1, job_demands=[1, 1],
                          job_ids=["J1", "J1"]))
    with pytest.raises(InvalidScenario):
        run(CatalogParams(machine_count=0, job_demands=[1]))
