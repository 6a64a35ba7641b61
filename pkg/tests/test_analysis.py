"""Reachability exploration and property checks.

The marking-level explorer is only trusted because every catalog net has
open-ended firing intervals; the equivalence with the timed explorer is
itself asserted here on representative nets.
"""

import pytest

from qurdlab.analysis import (DEFAULT_BOUND, Truncated, check_invariant,
                              check_invariant_vector, check_p_invariant,
                              check_reachable, completion_skip, explore,
                              explore_colored, explore_markings,
                              find_deadlocks, pending_deadlocks,
                              replay_labels, timed_witness)
from qurdlab.catalog import (CatalogParams, build_client_net, build_colored,
                             build_full, build_machine, build_net,
                             build_two_clients, universe_for)
from qurdlab.tpn import Net


def contention(timeout):
    return build_two_clients(CatalogParams(
        machine_count=3, job_demands=[3, 2], timeout=timeout))


# -- explore ------------------------------------------------------------------

def test_machine_alone_one_state():
    g = explore(build_machine())
    assert g.n_states == 1
    assert g.edges[0] == []


def test_client_graph_closed_and_done_reachable():
    p = CatalogParams(machine_count=1, job_demands=[1], timeout=None)
    g = explore(build_client_net(p))
    assert not g.truncated
    assert any(g.marking(i).get("job_done@J1", 0) == 1
               for i in range(g.n_states))


def test_bound_truncates():
    p = CatalogParams(machine_count=1, job_demands=[1], timeout=None)
    g = explore(build_client_net(p), bound=1)
    assert g.truncated


def test_explore_deterministic():
    net = contention(3)
    a = explore(net, bound=5000)
    b = explore(net, bound=5000)
    assert [s.counts for s in a.states] == [s.counts for s in b.states]
    assert a.edges == b.edges


def test_parallel_explore_identical():
    net = contention(None)
    single = explore(net)
    multi = explore(net, workers=4)
    assert [s.counts for s in single.states] == [s.counts for s in multi.states]
    assert single.edges == multi.edges
    assert single.dead_ids() == multi.dead_ids()


def test_marking_explorer_matches_timed_markings():
    """With every lfd open, untimed marking closure equals the set of
    markings of the timed graph, and deadlock status agrees."""
    for params in (CatalogParams(machine_count=1, job_demands=[1]),
                   CatalogParams(machine_count=2, job_demands=[2],
                                 timeout=None),
                   CatalogParams(machine_count=2, job_demands=[1, 1],
                                 failure_detector=True)):
        net = build_net(params)
        gm = explore_markings(net)
        gt = explore(net)
        timed = {tuple(s.counts) for s in gt.states}
        untimed = {gm.counts(i) for i in range(gm.n_states)}
        assert timed == untimed, params
        timed_dead = {tuple(gt.state(i).counts) for i in gt.dead_ids()}
        untimed_dead = {gm.counts(i) for i in gm.dead_ids()}
        assert timed_dead == untimed_dead, params


def test_marking_explorer_refuses_finite_lfd():
    net = Net()
    net.add_place("p", tokens=1)
    net.add_transition("t", pre={"p": 1}, post={}, interval=(0, 2))
    with pytest.raises(ValueError):
        explore_markings(net)
    assert explore_markings(net, force=True).n_states == 2


# -- deadlocks ------------------------------------------------------------------

def test_contention_deadlock_found():
    g = explore_markings(contention(None))
    dead = find_deadlocks(g)
    assert dead
    assert any(m.get("answered@J1", 0) == 2 and m.get("answered@J2", 0) == 1
               for m in dead)


def test_timeout_leaves_only_completion():
    g = explore_markings(contention(3))
    assert pending_deadlocks(g) == []
    # the one remaining terminal is both jobs done
    skip = completion_skip(g)
    assert all(skip(g.marking(i)) for i in g.dead_ids())
    assert g.dead_ids()


def test_no_transitions_initial_dead():
    net = Net()
    net.add_place("p", tokens=1)
    g = explore_markings(net)
    assert find_deadlocks(g) == [{"p": 1}]


def test_truncated_graph_refuses_checks():
    g = explore_markings(contention(None), bound=10)
    with pytest.raises(Truncated):
        find_deadlocks(g)
    with pytest.raises(Truncated):
        check_invariant(g, lambda m: True)


# -- invariants -------------------------------------------------------------------

def test_mutex_single_machine_two_jobs():
    p = CatalogParams(machine_count=1, job_demands=[1, 1], timeout=None)
    g = explore_markings(build_two_clients(p))
    pairs = [q for q in g.net.places
             if q.startswith(("reserved@(", "running@(", "finished@("))]
    v = check_invariant(g, lambda m: sum(m.get(q, 0) for q in pairs) <= 1,
                        name="mutex")
    assert v.holds
    assert v.states_explored == g.n_states


def test_machine_invariant_on_reachable_states():
    p = CatalogParams(machine_count=2, job_demands=[2],
                      failure_detector=True, zeroconf=True)
    net = build_net(p)
    g = explore_markings(net)
    for m in p.machines():
        weights = {q: 1 for q in net.places
                   if q.endswith("@%s" % m)
                   or ("@(%s," % m) in q and q.startswith(
                       ("reserved", "running", "finished"))}
        v = check_invariant_vector(g, weights, 1, 1, name=m)
        assert v.holds, m


def test_invariant_violation_witness_replays():
    p = CatalogParams(machine_count=1, job_demands=[1])
    net = build_client_net(p)
    g = explore_markings(net)
    v = check_invariant(g, lambda m: m.get("answered@J1", 0) < 1)
    assert not v.holds
    assert v.witness[-1][1] == "t1@(M1,J1)"
    end = replay_labels(net, v.witness)
    assert end.marking.get("answered@J1", 0) >= 1


# -- reachability -------------------------------------------------------------------

def test_full_demand_met_reachable():
    g = explore_markings(build_full())
    v = check_reachable(g, lambda m: m.get("job_done@J1", 0) >= 1)
    assert v.holds
    end = replay_labels(g.net, v.witness)
    assert end.marking.get("job_done@J1", 0) >= 1


def test_oversubscribed_fail_unreachable():
    p = CatalogParams(machine_count=4, job_demands=[5], semantics="fail")
    g = explore_markings(build_net(p))
    v = check_reachable(g, lambda m: m.get("job_done@J1", 0) >= 1)
    assert not v.holds
    assert v.witness is None


def test_goal_initial_trivially_reachable():
    net = build_machine()
    g = explore_markings(net)
    v = check_reachable(g, lambda m: m == {"available": 1})
    assert v.holds
    assert v.witness == []


# -- structural invariant -------------------------------------------------------

def test_p_invariant_machine_vector():
    net = build_machine()
    assert check_p_invariant(net, {"available": 1, "reserved": 1,
                                   "running": 1, "finished": 1})


def test_p_invariant_rejects_growing_sum():
    net = build_client_net(CatalogParams(machine_count=1, job_demands=[1]))
    assert not check_p_invariant(net, {"answered@J1": 1})


def test_p_invariant_zero_vector():
    assert check_p_invariant(build_machine(), {})


# -- witnesses ----------------------------------------------------------------------

def test_timed_witness_waits_out_efd():
    p = CatalogParams(machine_count=1, job_demands=[1], timeout=3)
    net = build_net(p)
    labels = timed_witness(net, ["start_job@J1", "t1@(M1,J1)",
                                 "cancel@(M1,J1)"])
    assert labels == [(0, "start_job@J1"), (0, "t1@(M1,J1)"),
                      (3, "cancel@(M1,J1)")]
    replay_labels(net, labels)


def test_path_labels_replay_everywhere():
    g = explore_markings(contention(3), bound=2000)
    for i in range(0, g.n_states, 97):
        end = replay_labels(g.net, g.path_labels(i))
        assert end.marking == g.marking(i)


# -- colored exploration ---------------------------------------------------------

def test_colored_counts_match_unfolded():
    p = CatalogParams(machine_count=2, job_demands=[1, 1])
    cnet = build_colored(universe_for(p), p)
    from qurdlab.colored import unfold
    gc = explore_colored(cnet)
    gu = explore_markings(unfold(cnet))
    assert gc.n_states == gu.n_states
    assert len(gc.dead) == len(gu.dead)


def test_colored_completion_skip():
    p = CatalogParams(machine_count=2, job_demands=[1, 1])
    cnet = build_colored(universe_for(p), p)
    g = explore_colored(cnet)
    assert pending_deadlocks(g) == []
