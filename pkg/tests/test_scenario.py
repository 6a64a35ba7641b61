"""Scenario grammar: parsing, defaults, errors, and render round-trip."""

import random

import pytest

from qurdlab.scenario import (JobSpec, Scenario, ScenarioError,
                              parse_scenario)

CONTENTION = """\
machines 3
job J1 demand 3 semantics wait
job J2 demand 2 semantics wait
timeout off
"""


def test_contention_scenario_parses():
    sc = parse_scenario(CONTENTION)
    assert sc.machines == 3
    assert sc.jobs == [JobSpec("J1", 3, "wait"), JobSpec("J2", 2, "wait")]
    assert sc.timeout is None
    p = sc.params()
    assert p.job_demands == [3, 2]
    assert p.timeout is None


def test_defaults():
    sc = parse_scenario("machines 1\njob J1 demand 1 semantics wait\n")
    assert sc.timeout == 3
    assert sc.bus_latency == 1 and sc.msg_latency == 1
    assert sc.job_duration == 2
    assert sc.seed == 0
    assert not sc.zeroconf and not sc.failure_detector
    assert sc.crashes == []


def test_comments_and_blanks_ignored():
    sc = parse_scenario("# header\n\nmachines 2   # trailing\n"
                        "job J1 demand 1 semantics fail\n")
    assert sc.machines == 2
    assert sc.jobs[0].semantics == "fail"


def test_all_directives():
    sc = parse_scenario(
        "machines 2\njob J1 demand 1 semantics wait\n"
        "timeout 5\nzeroconf on\nfailure-detector on\n"
        "crash M2 at 4\nbus-latency 0\nmsg-latency 2\n"
        "job-duration 1\nseed 42\n")
    assert sc.timeout == 5
    assert sc.zeroconf and sc.failure_detector
    assert sc.crashes == [("M2", 4)]
    cfg = sc.config()
    assert (cfg.bus_latency, cfg.msg_latency) == (0, 2)
    assert cfg.job_duration == 1
    assert cfg.seed == 42


def test_errors_are_line_numbered():
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario("machines 2\nwibble on\n")
    with pytest.raises(ScenarioError, match="line 1"):
        parse_scenario("machines two\n")
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario("machines 2\njob J1 demand 1\n")


def test_validation_errors():
    with pytest.raises(ScenarioError, match="machines must be >= 1"):
        parse_scenario("machines 0\njob J1 demand 1 semantics wait\n")
    with pytest.raises(ScenarioError, match="unknown machine M9"):
        parse_scenario("machines 4\njob J1 demand 1 semantics wait\n"
                       "crash M9 at 1\n")
    with pytest.raises(ScenarioError, match="at least one job"):
        parse_scenario("machines 2\n")
    with pytest.raises(ScenarioError, match="duplicate machines"):
        parse_scenario("machines 2\nmachines 2\n"
                       "job J1 demand 1 semantics wait\n")
    with pytest.raises(ScenarioError, match="missing machines"):
        parse_scenario("job J1 demand 1 semantics wait\n")
    with pytest.raises(ScenarioError, match="semantics"):
        parse_scenario("machines 1\njob J1 demand 1 semantics later\n")
    with pytest.raises(ScenarioError, match="collides"):
        parse_scenario("machines 1\njob M1 demand 1 semantics wait\n")


def random_scenario(rng):
    machines = rng.randint(1, 5)
    jobs = [JobSpec("J%d" % (i + 1), rng.randint(1, 4),
                    rng.choice(("fail", "wait")))
            for i in range(rng.randint(1, 3))]
    crashes = [("M%d" % rng.randint(1, machines), rng.randint(0, 9))
               for _ in range(rng.randint(0, 2))]
    return Scenario(
        machines=machines, jobs=jobs,
        timeout=rng.choice((None, 1, 3, 7)),
        zeroconf=rng.random() < 0.5,
        failure_detector=rng.random() < 0.5,
        crashes=crashes,
        bus_latency=rng.randint(0, 3), msg_latency=rng.randint(0, 3),
        job_duration=rng.randint(1, 4), seed=rng.randint(0, 10**6))


def test_render_parse_round_trip():
    rng = random.Random(2024)
    for _ in range(50):
        sc = random_scenario(rng)
        assert parse_scenario(sc.render()) == sc
