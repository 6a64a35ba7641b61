"""Graphviz DOT export for nets and reachability graphs.

Output is plain DOT text with nodes emitted in declaration order, so the
same net or graph always serializes to the same bytes.
"""

from __future__ import annotations

import numpy as np

MAX_GRAPH_STATES = 10_000


class GraphTooLarge(ValueError):
    """Reachability graph exceeds the export limit."""


def _q(name):
    # embedded newlines become DOT line breaks
    s = (str(name).replace("\\", "\\\\").replace('"', '\\"')
         .replace("\n", "\\n"))
    return '"%s"' % s


def _interval_label(efd, lfd):
    hi = "inf" if lfd is None else str(lfd)
    return "[%d,%s]" % (efd, hi)


def net_dot(net, name="net") -> str:
    """Places as ellipses (with token counts), transitions as boxes."""
    lines = ["digraph %s {" % _q(name)]
    lines.append("  rankdir=LR;")
    lines.append("  node [fontsize=10];")
    for p in net.places:
        tokens = net.initial.get(p, 0)
        label = p if not tokens else "%s\n%d" % (p, tokens)
        lines.append("  %s [shape=ellipse, label=%s];" % (_q(p), _q(label)))
    for t in net.transitions:
        efd, lfd = net.interval[t]
        if efd == 0 and lfd is None:
            label = t
        else:
            label = "%s\n%s" % (t, _interval_label(efd, lfd))
        lines.append("  %s [shape=box, label=%s];" % (_q(t), _q(label)))
    for t in net.transitions:
        for p, w in sorted(net.pre[t].items()):
            suffix = " [label=%s]" % _q(str(w)) if w > 1 else ""
            lines.append("  %s -> %s%s;" % (_q(p), _q(t), suffix))
        for p, w in sorted(net.post[t].items()):
            suffix = " [label=%s]" % _q(str(w)) if w > 1 else ""
            lines.append("  %s -> %s%s;" % (_q(t), _q(p), suffix))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _marking_label(marking):
    if not marking:
        return "(empty)"
    return "\n".join("%s=%d" % (p, n) for p, n in sorted(marking.items()))


def reach_dot(graph, name="reach", limit=MAX_GRAPH_STATES) -> str:
    """Reachability graph as DOT; refuses graphs above ``limit`` states.

    Works for both timed graphs (edges labeled ``delay/transition``) and
    marking graphs (edges labeled with the transition alone).
    """
    n = graph.n_states
    if n > limit:
        raise GraphTooLarge("%d states exceeds the %d-state export limit"
                            % (n, limit))
    lines = ["digraph %s {" % _q(name)]
    lines.append("  node [shape=box, fontsize=9];")
    dead = set(graph.dead_ids())
    for i in range(n):
        label = "s%d\n%s" % (i, _marking_label(graph.marking(i)))
        extra = ", style=filled, fillcolor=lightgray" if i in dead else ""
        lines.append("  s%d [label=%s%s];" % (i, _q(label), extra))
    for i, label, j in _edge_iter(graph):
        lines.append("  s%d -> s%d [label=%s];" % (i, j, _q(label)))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _edge_iter(graph):
    if hasattr(graph, "edges"):                    # timed graph, edges stored
        for i, succs in enumerate(graph.edges):
            for (d, t), j in succs:
                yield i, "%d/%s" % (d, t), j
        return
    net = graph.net                                # marking graph, recompute
    for i in range(graph.n_states):
        m = graph.marking(i)
        for t in net.enabled(m):
            m2 = net.fire_marking(m, t)
            row = np.array(net.marking_tuple(m2), dtype=np.int16)
            j = graph.index.get(row.tobytes())
            if j is not None:
                yield i, t, j
