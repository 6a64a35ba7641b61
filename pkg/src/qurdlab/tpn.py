"""Place/transition Time Petri nets with integer-time strong semantics.

A ``Net`` is a classical P/T net whose transitions carry a static firing
interval ``(efd, lfd)``: a transition may fire only after being enabled for
at least ``efd`` time units, and time may not advance past ``lfd`` while it
is enabled (``lfd = None`` means no upper bound).  Time is discrete: delays
are nonnegative integers and per-transition clocks are capped at a finite
``cap`` so the timed state space stays finite.

``TimedState`` values are immutable and hashable; all operations are pure
functions that return fresh states, so states can be shared freely across
threads and deduplicated by equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Marking = dict  # place name -> token count (absent = 0)


class NotFireable(Exception):
    """Raised when firing a transition that is not fireable."""

    def __init__(self, transition):
        self.transition = transition
        super().__init__(f"transition {transition!r} is not fireable")


class UrgencyViolation(Exception):
    """Raised when a delay would push an enabled transition past its lfd."""

    def __init__(self, transition):
        self.transition = transition
        super().__init__(f"time may not pass the upper bound of {transition!r}")


class Net:
    """A Time Petri net: places, transitions, weighted arcs, intervals.

    Construction is incremental (``add_place`` / ``add_transition``) and
    intentionally permissive: structural errors are reported by
    ``validate()`` rather than raised, so malformed nets can be inspected.
    After construction a net is treated as immutable.
    """

    def __init__(self, name="net"):
        self.name = name
        self.places = []            # ordered place names
        self.transitions = []       # ordered transition names
        self.pre = {}               # transition -> {place: weight}
        self.post = {}              # transition -> {place: weight}
        self.interval = {}          # transition -> (efd, lfd or None)
        self.initial = {}           # place -> token count
        self._compiled = None

    # -- construction -----------------------------------------------------

    def add_place(self, name, tokens=0):
        self.places.append(name)
        if tokens:
            self.initial[name] = tokens
        self._compiled = None
        return name

    def add_transition(self, name, pre=None, post=None, interval=(0, None)):
        self.transitions.append(name)
        self.pre[name] = dict(pre or {})
        self.post[name] = dict(post or {})
        self.interval[name] = tuple(interval)
        self._compiled = None
        return name

    # -- structural queries -----------------------------------------------

    def validate(self):
        """Return the list of structural violations (empty means ok)."""
        issues = []
        pset, tset = set(self.places), set(self.transitions)
        for name in pset & tset:
            issues.append(f"name used for both a place and a transition: {name}")
        if len(pset) != len(self.places):
            issues.append("duplicate place names")
        if len(tset) != len(self.transitions):
            issues.append("duplicate transition names")
        for side, arcs in (("pre", self.pre), ("post", self.post)):
            for t, places in arcs.items():
                if t not in tset:
                    issues.append(f"{side} arcs for unknown transition: {t}")
                for p, w in places.items():
                    if p not in pset:
                        issues.append(f"unknown place {p!r} on {side} arc of {t}")
                    if w < 1:
                        issues.append(f"arc weight {w} < 1 between {t} and {p}")
        for t, (efd, lfd) in self.interval.items():
            if t not in tset:
                issues.append(f"interval for unknown transition: {t}")
            if efd < 0:
                issues.append(f"negative efd on {t}")
            if lfd is not None and efd > lfd:
                issues.append(f"efd > lfd on {t}")
        for p, n in self.initial.items():
            if p not in pset:
                issues.append(f"initial marking on unknown place: {p}")
            if n < 0:
                issues.append(f"negative initial marking on {p}")
        return issues

    def default_cap(self):
        """Smallest sound clock cap: 1 + the largest finite bound in the net."""
        bound = 0
        for efd, lfd in self.interval.values():
            bound = max(bound, efd)
            if lfd is not None:
                bound = max(bound, lfd)
        return bound + 1

    def max_finite_lfd(self):
        """Largest finite lfd in the net, or None if every lfd is unbounded."""
        finite = [lfd for _, lfd in self.interval.values() if lfd is not None]
        return max(finite) if finite else None

    def enabled(self, marking):
        """Transitions enabled in ``marking``, in declaration order."""
        out = []
        for t in self.transitions:
            if all(marking.get(p, 0) >= w for p, w in self.pre[t].items()):
                out.append(t)
        return out

    def fire_marking(self, marking, t):
        """Untimed firing rule: marking - pre(t) + post(t) as a new dict."""
        if not all(marking.get(p, 0) >= w for p, w in self.pre[t].items()):
            raise NotFireable(t)
        out = dict(marking)
        for p, w in self.pre[t].items():
            out[p] = out.get(p, 0) - w
            if out[p] == 0:
                del out[p]
        for p, w in self.post[t].items():
            out[p] = out.get(p, 0) + w
        return out

    # -- canonical encodings ----------------------------------------------

    def transition_index(self, t):
        if self._compiled is None:
            self.compiled()
        return self._tidx[t]

    def compiled(self):
        """Index-based arc/interval tables, cached (places/transitions order)."""
        if self._compiled is None:
            self._tidx = {t: i for i, t in enumerate(self.transitions)}
            pidx = {p: i for i, p in enumerate(self.places)}
            pre = []
            post = []
            efd = []
            lfd = []
            for t in self.transitions:
                pre.append(tuple((pidx[p], w) for p, w in sorted(self.pre[t].items())))
                post.append(tuple((pidx[p], w) for p, w in sorted(self.post[t].items())))
                e, l = self.interval[t]
                efd.append(e)
                lfd.append(l)
            self._compiled = (pidx, tuple(pre), tuple(post), tuple(efd), tuple(lfd))
        return self._compiled

    def marking_tuple(self, marking):
        """Canonical encoding of a marking dict: counts in place order."""
        pidx = self.compiled()[0]
        counts = [0] * len(self.places)
        for p, n in marking.items():
            counts[pidx[p]] = n
        return tuple(counts)

    def marking_dict(self, counts):
        return {p: n for p, n in zip(self.places, counts) if n}

    def initial_state(self, marking=None, cap=None):
        """Timed state for ``marking`` (default: the net's initial marking)
        with every enabled transition's clock at 0."""
        if marking is None:
            marking = self.initial
        if cap is None:
            cap = self.default_cap()
        counts = self.marking_tuple(marking)
        _, pre, _, _, _ = self.compiled()
        clocks = tuple(
            0 if all(counts[p] >= w for p, w in pre[i]) else -1
            for i in range(len(self.transitions))
        )
        return TimedState(net=self, counts=counts, clocks=clocks, cap=cap)


@dataclass(frozen=True)
class TimedState:
    """A marking plus one capped integer clock per enabled transition.

    ``counts`` follows the net's place order; ``clocks`` follows the net's
    transition order with -1 marking disabled transitions.  Equality and
    hashing ignore the net reference, so states from the same net
    deduplicate by value.
    """

    net: Net = field(compare=False, repr=False)
    counts: tuple
    clocks: tuple
    cap: int

    @property
    def marking(self):
        return self.net.marking_dict(self.counts)

    @property
    def enabled(self):
        return [t for t, c in zip(self.net.transitions, self.clocks) if c >= 0]

    @property
    def clock_map(self):
        return {t: c for t, c in zip(self.net.transitions, self.clocks) if c >= 0}

    def clock(self, t):
        c = self.clocks[self.net.transition_index(t)]
        if c < 0:
            raise KeyError(f"{t} is not enabled")
        return c

    def fireable(self, t):
        """True iff ``t`` is enabled and its clock has reached efd(t)."""
        i = self.net.transition_index(t)
        c = self.clocks[i]
        return c >= 0 and c >= self.net.compiled()[3][i]

    def elapse(self, d):
        """Advance every clock by ``d`` (then cap).  Strong semantics: raises
        UrgencyViolation if the delay would pass a finite lfd."""
        if d < 0:
            raise ValueError("delay must be nonnegative")
        _, _, _, _, lfd = self.net.compiled()
        cap = self.cap
        clocks = list(self.clocks)
        for i, c in enumerate(clocks):
            if c < 0:
                continue
            nc = c + d
            if lfd[i] is not None and nc > lfd[i]:
                raise UrgencyViolation(self.net.transitions[i])
            clocks[i] = min(nc, cap)
        return TimedState(net=self.net, counts=self.counts, clocks=tuple(clocks), cap=cap)

    def fire(self, t):
        """Fire ``t``: consume pre, produce post, reset newly enabled clocks.

        Newly-enabled is judged against the intermediate marking
        (marking - pre(t)); the fired transition itself always restarts
        from 0 when it stays enabled.
        """
        ti = self.net.transition_index(t)
        _, pre, post, efd, _ = self.net.compiled()
        if self.clocks[ti] < 0 or self.clocks[ti] < efd[ti]:
            raise NotFireable(t)
        inter = list(self.counts)
        for p, w in pre[ti]:
            inter[p] -= w
        after = list(inter)
        for p, w in post[ti]:
            after[p] += w
        clocks = []
        for i in range(len(self.clocks)):
            if not all(after[p] >= w for p, w in pre[i]):
                clocks.append(-1)
            elif i == ti or not all(inter[p] >= w for p, w in pre[i]):
                clocks.append(0)
            else:
                clocks.append(self.clocks[i])
        return TimedState(net=self.net, counts=tuple(after), clocks=tuple(clocks), cap=self.cap)

    def max_useful_delay(self):
        """Smallest delay beyond which the capped clock vector stops changing."""
        gaps = [self.cap - c for c in self.clocks if c >= 0]
        return max(gaps) if gaps else 0

    def successors(self):
        """All one-step timed successors as ``((delay, transition), state)``.

        Delays run over 0..max_useful_delay in order, transitions in
        declaration order; successors whose resulting state was already
        produced at a smaller label are dropped.  An empty list means the
        state is timed-dead.
        """
        out = []
        seen = set()
        names = self.net.transitions
        efd = self.net.compiled()[3]
        for d in range(self.max_useful_delay() + 1):
            try:
                elapsed = self.elapse(d)
            except UrgencyViolation:
                break
            for i, c in enumerate(elapsed.clocks):
                if c >= efd[i]:
                    nxt = elapsed.fire(names[i])
                    if nxt not in seen:
                        seen.add(nxt)
                        out.append(((d, names[i]), nxt))
        return out
