"""Reachability-graph construction and property checks.

Two explorers are provided.  ``explore`` builds the timed reachability
graph over TimedState (clock vectors included), exactly as the semantics
defines it.  ``explore_markings`` is an untimed breadth-first closure over
markings only, vectorized with numpy; it refuses nets with a finite lfd,
because dropping clocks is faithful exactly when no upper bound can force
a firing: with every lfd unbounded, any untimed firing sequence can be
realized in the timed net by waiting, so the reachable marking sets
coincide and a marking is dead iff every timed state over it is
timed-dead.  The catalog nets only ever bound `cancel` from below, so all
scenario analyses can use the fast explorer; the equivalence is checked
empirically in the test suite.

All checks return a ``Verdict`` whose witness replays from the initial
state: witnesses from marking-level exploration are converted to timed
``(delay, transition)`` labels by waiting out each earliest firing delay.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import colored as cpn

DEFAULT_BOUND = 2_000_000


class Truncated(Exception):
    """A property was asked of a graph that hit its exploration bound."""


@dataclass
class Verdict:
    property: str
    holds: bool
    witness: object          # list of (delay, transition) labels, or None
    states_explored: int

    def __str__(self):
        tail = f" witness of length {len(self.witness)}" if self.witness else ""
        return (f"{self.property}: {'holds' if self.holds else 'fails'} "
                f"({self.states_explored} states){tail}")


class ReachGraph:
    """Deduplicated timed states with labeled successor edges."""

    def __init__(self, net, bound):
        self.net = net
        self.bound = bound
        self.states = []
        self.index = {}
        self.edges = []          # per state id: list of ((d, t), succ id)
        self.parent = []         # per state id: (parent id, label) or None
        self.truncated = False

    @property
    def initial(self):
        return self.states[0]

    @property
    def n_states(self):
        return len(self.states)

    def state(self, i):
        return self.states[i]

    def marking(self, i):
        return self.states[i].marking

    def dead_ids(self):
        return [i for i, e in enumerate(self.edges) if not e]

    def path_labels(self, i):
        """(delay, transition) labels along the BFS tree path to state i."""
        labels = []
        while self.parent[i] is not None:
            i, label = self.parent[i]
            labels.append(label)
        labels.reverse()
        return labels


def explore(net, bound=DEFAULT_BOUND, marking=None, cap=None, workers=1):
    """Breadth-first closure of timed successors, up to ``bound`` states.

    ``workers > 1`` expands each frontier level in a thread pool; results
    are merged in frontier order, so the graph is identical to the
    single-threaded one.
    """
    g = ReachGraph(net, bound)
    s0 = net.initial_state(marking=marking, cap=cap)
    g.states.append(s0)
    g.index[s0] = 0
    g.edges.append([])
    g.parent.append(None)
    frontier = [0]
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frontier and not g.truncated:
            if pool is not None:
                chunk = max(1, len(frontier) // (workers * 4))
                succ_lists = list(pool.map(
                    lambda i: g.states[i].successors(), frontier, chunksize=chunk))
            else:
                succ_lists = [g.states[i].successors() for i in frontier]
            nxt = []
            for i, succs in zip(frontier, succ_lists):
                for label, s in succs:
                    sid = g.index.get(s)
                    if sid is None:
                        if g.n_states >= bound:
                            g.truncated = True
                            break
                        sid = g.n_states
                        g.states.append(s)
                        g.index[s] = sid
                        g.edges.append([])
                        g.parent.append((i, label))
                        nxt.append(sid)
                    g.edges[i].append((label, sid))
                if g.truncated:
                    break
            frontier = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    return g


class MarkingGraph:
    """Untimed reachable markings, stored as one int16 matrix row each."""

    def __init__(self, net, bound):
        self.net = net
        self.bound = bound
        self.index = {}          # row bytes -> id
        self.parent = []         # per id: (parent id, transition index) or None
        self.dead = []           # ids with no enabled transition
        self.matrix = None       # n_states x n_places, set by explore_markings
        self.truncated = False

    @property
    def n_states(self):
        return len(self.parent)

    def state(self, i):
        return self.marking(i)

    def marking(self, i):
        row = self.matrix[i]
        return {p: int(n) for p, n in zip(self.net.places, row) if n}

    def counts(self, i):
        return tuple(int(n) for n in self.matrix[i])

    def dead_ids(self):
        return list(self.dead)

    def path_transitions(self, i):
        names = self.net.transitions
        out = []
        while self.parent[i] is not None:
            i, t = self.parent[i]
            out.append(names[t])
        out.reverse()
        return out

    def path_labels(self, i):
        return timed_witness(self.net, self.path_transitions(i))


def explore_markings(net, bound=DEFAULT_BOUND, marking=None, force=False):
    """Vectorized untimed BFS over markings (see module docstring).

    Raises ValueError for nets with a finite lfd unless ``force`` is set,
    since untimed closure is only faithful without firing deadlines.
    """
    if not force and net.max_finite_lfd() is not None:
        raise ValueError(
            "net has a finite lfd; marking-level exploration would be unsound")
    _, pre, _, _, _ = net.compiled()
    n_places = len(net.places)
    pre_cols = []
    pre_w = []
    deltas = np.zeros((len(net.transitions), n_places), dtype=np.int16)
    for ti, t in enumerate(net.transitions):
        cols = np.array([p for p, _ in pre[ti]], dtype=np.intp)
        pre_cols.append(cols)
        pre_w.append(np.array([w for _, w in pre[ti]], dtype=np.int16))
        for p, w in pre[ti]:
            deltas[ti, p] -= w
        for p, w in net.post[t].items():
            deltas[ti, net.compiled()[0][p]] += w

    g = MarkingGraph(net, bound)
    row0 = np.array(net.marking_tuple(marking or net.initial), dtype=np.int16)
    g.index[row0.tobytes()] = 0
    g.parent.append(None)
    levels = [row0[None, :]]
    frontier = row0[None, :]
    frontier_ids = np.array([0], dtype=np.intp)

    while len(frontier) and not g.truncated:
        enabled_any = np.zeros(len(frontier), dtype=bool)
        new_rows = []
        for ti in range(len(net.transitions)):
            if pre_cols[ti].size:
                mask = (frontier[:, pre_cols[ti]] >= pre_w[ti]).all(axis=1)
            else:
                mask = np.ones(len(frontier), dtype=bool)
            if not mask.any():
                continue
            enabled_any |= mask
            rows = np.nonzero(mask)[0]
            succ = frontier[rows] + deltas[ti]
            for local, row in zip(rows, succ):
                key = row.tobytes()
                if key not in g.index:
                    if g.n_states >= bound:
                        g.truncated = True
                        break
                    g.index[key] = g.n_states
                    g.parent.append((int(frontier_ids[local]), ti))
                    new_rows.append(row)
            if g.truncated:
                break
        g.dead.extend(int(frontier_ids[i])
                      for i in np.nonzero(~enabled_any)[0])
        if new_rows:
            block = np.stack(new_rows)
            levels.append(block)
            frontier_ids = np.arange(g.n_states - len(block), g.n_states,
                                     dtype=np.intp)
            frontier = block
        else:
            frontier = row0[:0]
    g.matrix = np.concatenate(levels, axis=0)
    return g


class ColoredGraph:
    """Reachable colored markings (untimed) with binding-labeled tree paths."""

    def __init__(self, cnet, bound):
        self.cnet = cnet
        self.bound = bound
        self.states = []         # colored marking dicts
        self.index = {}          # canonical form -> id
        self.parent = []         # (parent id, (transition, binding)) or None
        self.dead = []
        self.truncated = False

    @property
    def n_states(self):
        return len(self.states)

    def state(self, i):
        return self.states[i]

    def marking(self, i):
        return self.states[i]

    def dead_ids(self):
        return list(self.dead)

    def path_labels(self, i):
        out = []
        while self.parent[i] is not None:
            i, label = self.parent[i]
            out.append(label)
        out.reverse()
        return out


def explore_colored(cnet, bound=DEFAULT_BOUND, force=False):
    """Untimed BFS over colored markings via colored_enabled/colored_fire.

    Same finite-lfd guard as explore_markings.
    """
    if not force:
        for efd, lfd in cnet.interval.values():
            if lfd is not None:
                raise ValueError("colored net has a finite lfd; "
                                 "untimed exploration would be unsound")
    g = ColoredGraph(cnet, bound)
    m0 = cnet.initial_marking()
    g.states.append(m0)
    g.index[cpn.canonical(m0)] = 0
    g.parent.append(None)
    frontier = [0]
    while frontier and not g.truncated:
        nxt = []
        for i in frontier:
            fired = cpn.colored_enabled(cnet, g.states[i])
            if not fired:
                g.dead.append(i)
                continue
            for t, b in fired:
                m = cpn.colored_fire(cnet, g.states[i], t, b)
                key = cpn.canonical(m)
                if key not in g.index:
                    if g.n_states >= bound:
                        g.truncated = True
                        break
                    g.index[key] = g.n_states
                    g.states.append(m)
                    g.parent.append((i, (t, b)))
                    nxt.append(g.n_states - 1)
            if g.truncated:
                break
        frontier = nxt
    return g


# -- witnesses ----------------------------------------------------------------

def timed_witness(net, transitions, marking=None, cap=None):
    """Lift an untimed firing sequence to (delay, transition) labels by
    waiting out each transition's remaining earliest firing delay.  Only
    valid when no finite lfd can block the wait, which the caller
    guarantees by having used marking-level exploration."""
    state = net.initial_state(marking=marking, cap=cap)
    efd = net.compiled()[3]
    labels = []
    for t in transitions:
        ti = net.transition_index(t)
        d = max(0, efd[ti] - state.clocks[ti])
        state = state.elapse(d).fire(t)
        labels.append((d, t))
    return labels


def replay_labels(net, labels, marking=None, cap=None):
    """Replay (delay, transition) labels from the initial state; returns the
    final TimedState.  Raises if any step is not fireable."""
    state = net.initial_state(marking=marking, cap=cap)
    for d, t in labels:
        state = state.elapse(d).fire(t)
    return state


# -- property checks ------------------------------------------------------------

def _require_complete(g):
    if g.truncated:
        raise Truncated(f"exploration hit the bound of {g.bound} states")


def find_deadlocks(g, skip=None):
    """States with no successor at all (timed-dead in timed graphs, no
    enabled transition in marking graphs).  ``skip`` filters out states
    whose marking is an acceptable terminal (e.g. proper completion)."""
    _require_complete(g)
    out = []
    for i in g.dead_ids():
        if skip is not None and skip(g.marking(i)):
            continue
        out.append(g.state(i))
    return out


def completion_skip(g):
    """Predicate over markings of ``g``: every job's job_done is populated
    (the regular terminal of a run where every job completed)."""
    if isinstance(g, ColoredGraph):
        n_jobs = len(g.cnet.universe.jobs)
        return lambda cm: len(cm.get("job_done", ())) == n_jobs
    names = [p for p in g.net.places
             if p == "job_done" or p.startswith(("job_done@", "job_done."))]
    return lambda m: bool(names) and all(m.get(p, 0) >= 1 for p in names)


def pending_deadlocks(g):
    """Deadlocks that are not proper completion: some job never finished."""
    return find_deadlocks(g, skip=completion_skip(g))


def check_invariant(g, predicate, name="invariant"):
    """Verdict: predicate holds in every reachable marking; otherwise the
    witness is the BFS tree path to the first violation."""
    _require_complete(g)
    for i in range(g.n_states):
        if not predicate(g.marking(i)):
            return Verdict(name, False, g.path_labels(i), g.n_states)
    return Verdict(name, True, None, g.n_states)


def check_reachable(g, goal, name="reachable"):
    """Verdict: some reachable marking satisfies the goal; the witness is
    the BFS tree path to the first one found."""
    _require_complete(g)
    for i in range(g.n_states):
        if goal(g.marking(i)):
            return Verdict(name, True, g.path_labels(i), g.n_states)
    return Verdict(name, False, None, g.n_states)


def check_invariant_vector(g, weights, lo, hi, name="weighted invariant"):
    """Fast path for marking graphs: lo <= weights . counts <= hi for every
    reachable marking, checked as one matrix product."""
    _require_complete(g)
    w = np.asarray([weights.get(p, 0) for p in g.net.places], dtype=np.int64)
    sums = g.matrix.astype(np.int64) @ w
    bad = np.nonzero((sums < lo) | (sums > hi))[0]
    if bad.size:
        return Verdict(name, False, g.path_labels(int(bad[0])), g.n_states)
    return Verdict(name, True, None, g.n_states)


def check_p_invariant(net, weights):
    """Structural invariance: the weighted token sum is unchanged by every
    transition (incidence-column test; no exploration)."""
    pidx = net.compiled()[0]
    w = np.zeros(len(net.places), dtype=np.int64)
    for p, x in weights.items():
        w[pidx[p]] = x
    incidence = np.zeros((len(net.places), len(net.transitions)), dtype=np.int64)
    for ti, t in enumerate(net.transitions):
        for p, x in net.pre[t].items():
            incidence[pidx[p], ti] -= x
        for p, x in net.post[t].items():
            incidence[pidx[p], ti] += x
    return bool((w @ incidence == 0).all())
