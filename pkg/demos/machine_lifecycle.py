"""
Walking one machine through its reservation cycle
==================================================

A machine daemon is a four-place loop: available -> reserved -> running
-> finished -> available.  The client side feeds it (get_nodes,
launching_job) and reads back (answered, job_finished).  Here we drive
the net by hand, one firing at a time.
"""

from qurdlab.catalog import build_machine

net = build_machine(timeout=3)

print("places:", ", ".join(net.places))
print("transitions:")
for t in net.transitions:
    lo, hi = net.interval[t]
    print(f"  {t}: {dict(net.pre[t])} -> {dict(net.post[t])}"
          f"  [{lo},{'inf' if hi is None else hi}]")

# Alone, the machine is inert: t1 also needs a client token in get_nodes.
state = net.initial_state()
print("\nno client, successors:", state.successors())

# Seed a reservation request and walk the happy path.
state = net.initial_state(marking={"available": 1, "get_nodes": 1})
for t in ("t1", "t2", "t3", "t4"):
    if t == "t2":
        # the client launches the job; in the composed net this token
        # comes from the launch transition
        m = dict(state.marking)
        m["launching_job"] = m.get("launching_job", 0) + 1
        state = net.initial_state(marking=m)
    state = state.fire(t)
    print(f"after {t}: {state.marking}")

# The timeout branch: reserve again and just wait.  cancel carries the
# static interval [3, inf], so it refuses to fire before 3 ticks...
state = net.initial_state(marking={"available": 1, "get_nodes": 1}).fire("t1")
print("\nreserved; cancel fireable at t=0?", state.fireable("cancel"))

# ...but becomes fireable once the reservation has aged enough.
state = state.elapse(3)
print("after waiting 3 ticks, cancel fireable?", state.fireable("cancel"))
state = state.fire("cancel")
print("after cancel:", state.marking, "(machine back on offer)")
