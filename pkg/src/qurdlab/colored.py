"""Colored Petri nets over machine/job color domains, plus unfolding.

Places are typed by token sort: job tokens ``j``, machine tokens ``m`` or
pairs ``(m, j)``.  Arcs carry one inscription each: a pattern over the
variables m and j, optionally with multiplicity P'(j) (the job's demand).
Only variable matching is supported; the reservation model needs no
guards.  ``unfold`` expands a colored net over a finite universe into an
ordinary place/transition net with one place per (place, color) and one
transition per (transition, binding).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

from .tpn import Net, NotFireable

JOB = "job"
MACHINE = "machine"
PAIR = "pair"


class ColorUniverse:
    """Finite color domains: machine ids, job ids, and per-job demand."""

    def __init__(self, machines, jobs, demand):
        self.machines = tuple(machines)
        self.jobs = tuple(jobs)
        self.demand = dict(demand)

    def validate(self):
        issues = []
        if len(set(self.machines)) != len(self.machines):
            issues.append("duplicate machine ids")
        if len(set(self.jobs)) != len(self.jobs):
            issues.append("duplicate job ids")
        for j in self.jobs:
            if j not in self.demand:
                issues.append(f"no demand for job {j}")
            elif self.demand[j] < 1:
                issues.append(f"demand for job {j} must be >= 1")
        return issues

    def __repr__(self):
        return (f"ColorUniverse(machines={list(self.machines)}, "
                f"jobs={list(self.jobs)}, demand={self.demand})")


@dataclass(frozen=True)
class Inscription:
    """Arc inscription: a variable pattern and an optional P'(j) multiplicity."""

    pattern: str            # "m", "j" or "mj"
    per_demand: bool = False

    def tokens(self, m, j, demand):
        """Instantiated token multiset for a binding, as a list."""
        if self.pattern == "m":
            return [m]
        if self.pattern == "j":
            return [j] * (demand[j] if self.per_demand else 1)
        return [(m, j)]


class Binding(NamedTuple):
    m: object
    j: object

    def __repr__(self):
        parts = []
        if self.m is not None:
            parts.append(f"m={self.m}")
        if self.j is not None:
            parts.append(f"j={self.j}")
        return f"Binding({', '.join(parts)})"


SORT_OF_PATTERN = {"m": MACHINE, "j": JOB, "mj": PAIR}


class ColoredNet:
    """Colored net structure; immutable after construction by convention."""

    def __init__(self, universe, name="colored"):
        self.name = name
        self.universe = universe
        self.places = []
        self.sort = {}              # place -> JOB | MACHINE | PAIR
        self.transitions = []
        self.pre = {}               # transition -> {place: Inscription}
        self.post = {}
        self.interval = {}
        self.initial = {}           # place -> tuple of tokens

    def add_place(self, name, sort, tokens=()):
        self.places.append(name)
        self.sort[name] = sort
        if tokens:
            self.initial[name] = tuple(tokens)
        return name

    def add_transition(self, name, pre, post, interval=(0, None)):
        self.transitions.append(name)
        self.pre[name] = dict(pre)
        self.post[name] = dict(post)
        self.interval[name] = tuple(interval)
        return name

    def validate(self):
        issues = list(self.universe.validate())
        pset = set(self.places)
        for t in self.transitions:
            for side, arcs in (("pre", self.pre[t]), ("post", self.post[t])):
                for p, ins in arcs.items():
                    if p not in pset:
                        issues.append(f"unknown place {p!r} on {side} arc of {t}")
                        continue
                    if SORT_OF_PATTERN[ins.pattern] != self.sort[p]:
                        issues.append(
                            f"inscription {ins.pattern!r} does not match sort "
                            f"of place {p} on {t}")
                    if ins.per_demand and ins.pattern != "j":
                        issues.append(f"P'(j) multiplicity needs pattern j on {t}->{p}")
            efd, lfd = self.interval[t]
            if efd < 0 or (lfd is not None and efd > lfd):
                issues.append(f"bad interval on {t}")
        for p, toks in self.initial.items():
            for tok in toks:
                if not self._token_ok(p, tok):
                    issues.append(f"initial token {tok!r} has wrong sort for {p}")
        return issues

    def _token_ok(self, place, tok):
        sort = self.sort[place]
        if sort == MACHINE:
            return tok in self.universe.machines
        if sort == JOB:
            return tok in self.universe.jobs
        return (isinstance(tok, tuple) and len(tok) == 2
                and tok[0] in self.universe.machines and tok[1] in self.universe.jobs)

    def variables_of(self, t):
        """Which of m, j the transition's inscriptions mention."""
        needs_m = needs_j = False
        for arcs in (self.pre[t], self.post[t]):
            for ins in arcs.values():
                if ins.pattern in ("m", "mj"):
                    needs_m = True
                if ins.pattern in ("j", "mj"):
                    needs_j = True
        return needs_m, needs_j

    def bindings_of(self, t):
        """All bindings of t over the universe, (machine, job) lexicographic."""
        needs_m, needs_j = self.variables_of(t)
        ms = self.universe.machines if needs_m else (None,)
        js = self.universe.jobs if needs_j else (None,)
        return [Binding(m, j) for m in ms for j in js]

    def initial_marking(self):
        return {p: tuple(sorted(self.initial.get(p, ()))) for p in self.places}


def canonical(marking):
    """Canonical hashable form of a colored marking dict."""
    return tuple(tuple(sorted(marking.get(p, ()))) for p in sorted(marking))


def _has_tokens(marking, place, needed):
    have = Counter(marking.get(place, ()))
    need = Counter(needed)
    return all(have[tok] >= n for tok, n in need.items())


def binding_enabled(cnet, marking, t, binding):
    demand = cnet.universe.demand
    for p, ins in cnet.pre[t].items():
        if not _has_tokens(marking, p, ins.tokens(binding.m, binding.j, demand)):
            return False
    return True


def colored_enabled(cnet, marking):
    """All (transition, binding) pairs enabled in the marking, in
    declaration order then (machine, job) lexicographic binding order."""
    out = []
    for t in cnet.transitions:
        for b in cnet.bindings_of(t):
            if binding_enabled(cnet, marking, t, b):
                out.append((t, b))
    return out


def colored_fire(cnet, marking, t, binding):
    """Fire t under binding: remove instantiated inputs, add outputs."""
    if not binding_enabled(cnet, marking, t, binding):
        raise NotFireable((t, binding))
    demand = cnet.universe.demand
    out = {p: list(toks) for p, toks in marking.items()}
    for p, ins in cnet.pre[t].items():
        for tok in ins.tokens(binding.m, binding.j, demand):
            out[p].remove(tok)
    for p, ins in cnet.post[t].items():
        toks = out.setdefault(p, [])
        toks.extend(ins.tokens(binding.m, binding.j, demand))
    return {p: tuple(sorted(toks)) for p, toks in out.items()}


def token_name(tok):
    if isinstance(tok, tuple):
        return f"({tok[0]},{tok[1]})"
    return str(tok)


def unfold(cnet, universe=None):
    """Expand over the (finite) universe into a plain timed net.

    Each colored place becomes one place per color of its sort; each
    transition becomes one copy per binding; P'(j) inscriptions become
    integer arc weights.  Intervals carry over unchanged.
    """
    if universe is None:
        universe = cnet.universe
    net = Net(f"{cnet.name}-unfolded")
    domains = {
        JOB: list(universe.jobs),
        MACHINE: list(universe.machines),
        PAIR: [(m, j) for m in universe.machines for j in universe.jobs],
    }
    place_of = {}               # (colored place, token) -> plain place
    for p in cnet.places:
        initial = Counter(cnet.initial.get(p, ()))
        for tok in domains[cnet.sort[p]]:
            name = f"{p}.{token_name(tok)}"
            place_of[(p, tok)] = name
            net.add_place(name, tokens=initial[tok])
    demand = universe.demand
    for t in cnet.transitions:
        for b in cnet.bindings_of(t):
            pre = Counter()
            post = Counter()
            for arcs, acc in ((cnet.pre[t], pre), (cnet.post[t], post)):
                for p, ins in arcs.items():
                    for tok in ins.tokens(b.m, b.j, demand):
                        acc[place_of[(p, tok)]] += 1
            if b.m is not None and b.j is not None:
                name = f"{t}.{token_name((b.m, b.j))}"
            elif b.m is not None or b.j is not None:
                name = f"{t}.{b.m if b.m is not None else b.j}"
            else:
                name = t
            net.add_transition(name, pre=dict(pre), post=dict(post),
                               interval=cnet.interval[t])
    return net
