"""
Time matters: reservations expire, urgency forces progress
==========================================================

The nets carry static intervals [efd, lfd] per transition and run under
strong semantics: a transition that reaches its latest firing delay MUST
fire before more time passes.  Almost every transition here is [0, inf]
(free to wait forever); the interesting one is cancel at [timeout, inf],
which models a launcher abandoning a reservation it never used.
"""

from qurdlab.analysis import explore_markings, timed_witness
from qurdlab.catalog import CatalogParams, build_net, jname

# one launcher wanting 2 machines, but only 1 machine exists: the
# reservation it does get can never be completed by a launch
params = CatalogParams(machine_count=1, job_demands=[2], timeout=3)
net = build_net(params)

g = explore_markings(net)
print(f"{g.n_states} reachable markings")

# find the marking where the lone machine sits reserved
goal = lambda m: m.get("reserved@(M1,J1)", 0) >= 1
hit = next(i for i in range(g.n_states) if goal(g.marking(i)))
print("reserved marking:", {p: n for p, n in g.marking(hit).items() if n})

# lift the untimed path to a timed run: every step carries the delay
# waited before firing, and cancel cannot happen before tick 3
labels = timed_witness(net, g.path_transitions(hit)
                       + [jname("cancel", "(M1,J1)")])
print("timed run:")
clock = 0
for d, t in labels:
    clock += d
    print(f"  t={clock}: {t}" + (f"  (waited {d})" if d else ""))

# urgency in action: a transition with a finite latest firing delay
# cannot be outwaited
from qurdlab.tpn import Net, UrgencyViolation

toy = Net("deadline")
toy.add_place("p", 1)
toy.add_transition("now_or_never", {"p": 1}, {}, interval=(0, 2))
s = toy.initial_state()
print("\nwait 2 ticks: fine ->", s.elapse(2).marking)
try:
    s.elapse(3)
except UrgencyViolation as e:
    print("wait 3 ticks:", e)
