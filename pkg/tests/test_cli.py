"""Command-line behavior: reports, exit statuses, artifact files."""

import pytest

from qurdlab.analysis import replay_labels
from qurdlab.catalog import build_net
from qurdlab.cli import main
from qurdlab.conformance import parse_trace
from qurdlab.dot import GraphTooLarge, net_dot, reach_dot
from qurdlab.scenario import parse_scenario

CONTENTION = """\
machines 3
job J1 demand 3 semantics wait
job J2 demand 2 semantics wait
timeout off
"""

VOLATILITY = """\
machines 2
job J1 demand 1 semantics wait
failure-detector on
crash M1 at 2
bus-latency 0
msg-latency 0
"""


@pytest.fixture
def contention_file(tmp_path):
    f = tmp_path / "contention.scn"
    f.write_text(CONTENTION)
    return f


@pytest.fixture
def volatility_file(tmp_path):
    f = tmp_path / "volatility.scn"
    f.write_text(VOLATILITY)
    return f


def run_cli(capsys, *argv):
    status = main([str(a) for a in argv])
    return status, capsys.readouterr().out


# -- analyze --------------------------------------------------------------------

def test_analyze_finds_contention_deadlock(capsys, contention_file):
    witness = contention_file.with_suffix(".witness")
    status, out = run_cli(capsys, "analyze", contention_file,
                          "--out", witness)
    assert status == 1
    assert "deadlock: FOUND" in out
    assert "mutex: holds" in out
    assert "machine-invariant: holds" in out
    assert witness.exists()


def test_analyze_witness_replays_to_dead_state(capsys, contention_file):
    witness = contention_file.with_suffix(".witness")
    run_cli(capsys, "analyze", contention_file, "--property", "deadlock",
            "--out", witness)
    labels = []
    for line in witness.read_text().splitlines():
        if not line or line.startswith(("property:", "#")):
            continue
        d, t = line.split(" ", 1)
        labels.append((int(d), t))
    net = build_net(parse_scenario(CONTENTION).params())
    state = replay_labels(net, labels)
    assert not state.enabled


def test_analyze_timeout_clears_deadlock(capsys, tmp_path):
    f = tmp_path / "t.scn"
    f.write_text(CONTENTION.replace("timeout off", "timeout 3"))
    status, out = run_cli(capsys, "analyze", f)
    assert status == 0
    assert "deadlock: none" in out


def test_analyze_selected_property_only(capsys, contention_file):
    status, out = run_cli(capsys, "analyze", contention_file,
                          "--property", "mutex")
    assert status == 0
    assert "mutex: holds" in out
    assert "deadlock" not in out


def test_analyze_bound_exceeded(capsys, contention_file):
    status, out = run_cli(capsys, "analyze", contention_file, "--bound", "5")
    assert status == 2
    assert "truncated" in out


# -- simulate -------------------------------------------------------------------

def test_simulate_writes_trace(capsys, volatility_file, tmp_path):
    trace = tmp_path / "run.trace"
    status, out = run_cli(capsys, "simulate", volatility_file,
                          "--out", trace)
    assert status == 0
    assert "J1: completed" in out
    parsed = parse_trace(trace.read_text())
    assert parsed[0].kind == "job-submitted"


def test_simulate_nonzero_on_incomplete(capsys, tmp_path):
    f = tmp_path / "starved.scn"
    f.write_text("machines 1\njob J1 demand 2 semantics fail\n")
    status, out = run_cli(capsys, "simulate", f, "--out",
                          tmp_path / "s.trace")
    assert status == 1
    assert "J1: failed" in out


# -- conformance ----------------------------------------------------------------

def test_conformance_single_scenario(capsys, volatility_file):
    status, out = run_cli(capsys, "conformance", volatility_file)
    assert status == 0
    assert "conformance: ok" in out


def test_conformance_fuzz(capsys):
    status, out = run_cli(capsys, "conformance", "--fuzz", "10")
    assert status == 0
    assert "10/10 traces conform" in out


# -- export-dot -----------------------------------------------------------------

def test_export_machine_nodes(capsys):
    status, out = run_cli(capsys, "export-dot", "machine")
    assert status == 0
    for node in ("available", "reserved", "running", "finished"):
        assert '"%s"' % node in out


def test_export_scenario_net_to_file(capsys, contention_file, tmp_path):
    out_file = tmp_path / "net.dot"
    status, _ = run_cli(capsys, "export-dot", contention_file,
                        "--out", out_file)
    assert status == 0
    text = out_file.read_text()
    assert text.startswith("digraph")
    assert "answered@J1" in text


def test_export_reach_graph_stable(capsys, contention_file):
    status, first = run_cli(capsys, "export-dot", contention_file, "--reach")
    status2, second = run_cli(capsys, "export-dot", contention_file,
                              "--reach")
    assert status == status2 == 0
    assert first == second


def test_scenario_error_is_reported(tmp_path, capsys):
    f = tmp_path / "bad.scn"
    f.write_text("machines 0\n")
    status = main(["analyze", str(f)])
    captured = capsys.readouterr()
    assert status == 2
    assert "machines must be >= 1" in captured.err


# -- dot internals ----------------------------------------------------------------

def test_reach_dot_refuses_large_graphs(contention_file):
    from qurdlab.analysis import explore_markings
    net = build_net(parse_scenario(CONTENTION).params())
    g = explore_markings(net)
    with pytest.raises(GraphTooLarge):
        reach_dot(g, limit=10)


def test_net_dot_marks_interval():
    net = build_net(parse_scenario(
        "machines 1\njob J1 demand 1 semantics wait\ntimeout 3\n").params())
    text = net_dot(net)
    assert "[3,inf]" in text
