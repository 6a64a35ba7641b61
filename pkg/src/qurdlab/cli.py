"""Command-line front end.

Four subcommands::

    qurdlab analyze <scenario> [--property P]... [--bound N] [--out FILE]
    qurdlab simulate <scenario> [--out FILE]
    qurdlab conformance (<scenario> | --fuzz N)
    qurdlab export-dot <selector> [--reach] [--bound N] [--out FILE]

Scenario files use the grammar in :mod:`qurdlab.scenario`.  Exit status is
0 exactly when every checked property holds (analyze), every job completes
(simulate), or every replayed trace conforms (conformance).
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field

from . import analysis, conformance, dot
from .catalog import (CatalogParams, build_machine, build_net,
                      build_two_clients, jname, mname, split_pair)
from .scenario import Scenario, ScenarioError, parse_scenario
from .simulator import run as run_sim

PROPERTIES = ("deadlock", "mutex", "machine-invariant", "job-done-reachable")


@dataclass
class Report:
    command: str
    digest: str = ""
    lines: list = field(default_factory=list)
    witness_path: str = None
    exit_status: int = 0

    def add(self, line):
        self.lines.append(line)

    def render(self) -> str:
        out = ["command: %s" % self.command]
        if self.digest:
            out.append("scenario: %s" % self.digest)
        out.extend(self.lines)
        if self.witness_path:
            out.append("witness: %s" % self.witness_path)
        out.append("exit: %d" % self.exit_status)
        return "\n".join(out) + "\n"


def _load_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read())


def _digest(sc: Scenario) -> str:
    return hashlib.sha256(sc.render().encode()).hexdigest()[:12]


def _machine_places(net, m):
    """The places that make up machine m's one-token state invariant."""
    singles = [mname("available", m), mname("dead", m),
               mname("not_available", m)]
    weights = {p: 1 for p in singles if p in net.places}
    for p in net.places:
        if p.startswith(("reserved@(", "running@(", "finished@(")):
            _, pm, _ = split_pair(p)
            if pm == m:
                weights[p] = 1
    return weights


def _pair_places(net, m):
    """reserved/running/finished pairs of machine m (mutual exclusion)."""
    weights = {}
    for p in net.places:
        if p.startswith(("reserved@(", "running@(", "finished@(")):
            _, pm, _ = split_pair(p)
            if pm == m:
                weights[p] = 1
    return weights


def _format_witness(labels, marking=None):
    lines = ["%d %s" % (d, t) for d, t in labels]
    if marking is not None:
        lines.append("")
        lines.extend("# %s=%d" % (p, n) for p, n in sorted(marking.items()))
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> Report:
    sc = _load_scenario(args.scenario)
    report = Report("analyze %s" % args.scenario, _digest(sc))
    props = args.properties or list(PROPERTIES)
    net = build_net(sc.params())
    g = analysis.explore_markings(net, bound=args.bound)
    if g.truncated:
        report.add("truncated: bound of %d states exceeded" % args.bound)
        report.exit_status = 2
        return report
    report.add("states explored: %d" % g.n_states)

    witnesses = []
    machines = sc.machine_names()
    for prop in props:
        if prop == "deadlock":
            skip = analysis.completion_skip(g)
            bad = [i for i in g.dead_ids() if not skip(g.marking(i))]
            if bad:
                report.add("deadlock: FOUND (%d dead states)" % len(bad))
                witnesses.append(("deadlock", g.path_labels(bad[0]),
                                  g.marking(bad[0])))
                report.exit_status = 1
            else:
                report.add("deadlock: none")
        elif prop == "mutex":
            verdict = None
            for m in machines:
                v = analysis.check_invariant_vector(
                    g, _pair_places(net, m), 0, 1, name="mutex %s" % m)
                if not v.holds:
                    verdict = v
                    break
            if verdict is None:
                report.add("mutex: holds")
            else:
                report.add("mutex: VIOLATED (%s)" % verdict.property)
                witnesses.append(("mutex", verdict.witness, None))
                report.exit_status = 1
        elif prop == "machine-invariant":
            verdict = None
            for m in machines:
                v = analysis.check_invariant_vector(
                    g, _machine_places(net, m), 1, 1,
                    name="machine-invariant %s" % m)
                if not v.holds:
                    verdict = v
                    break
            if verdict is None:
                report.add("machine-invariant: holds")
            else:
                report.add("machine-invariant: VIOLATED (%s)"
                           % verdict.property)
                witnesses.append(("machine-invariant", verdict.witness, None))
                report.exit_status = 1
        elif prop == "job-done-reachable":
            done = [jname("job_done", j.name) for j in sc.jobs]
            v = analysis.check_reachable(
                g, lambda mk: all(mk.get(p, 0) >= 1 for p in done),
                name="job-done-reachable")
            if v.holds:
                report.add("job-done-reachable: holds")
                witnesses.append(("job-done-reachable", v.witness, None))
            else:
                report.add("job-done-reachable: UNREACHABLE")
                report.exit_status = 1
        else:
            raise ValueError("unknown property %r" % prop)

    failing = [w for w in witnesses if w[0] != "job-done-reachable"]
    if failing:
        path = args.out or (args.scenario + ".witness")
        with open(path, "w") as fh:
            for prop, labels, marking in failing:
                fh.write("property: %s\n" % prop)
                fh.write(_format_witness(labels, marking))
        report.witness_path = path
    return report


def cmd_simulate(args) -> Report:
    sc = _load_scenario(args.scenario)
    report = Report("simulate %s" % args.scenario, _digest(sc))
    result = run_sim(sc.params(), sc.config())
    for j in sorted(result.outcomes):
        report.add("%s: %s" % (j, result.outcomes[j]))
    path = args.out or (args.scenario + ".trace")
    with open(path, "w") as fh:
        fh.write(result.trace_text())
    report.add("trace: %s" % path)
    if any(o != "completed" for o in result.outcomes.values()):
        report.exit_status = 1
    return report


def cmd_conformance(args) -> Report:
    if args.fuzz is not None:
        report = Report("conformance --fuzz %d" % args.fuzz)
        summary = conformance.fuzz_conformance(args.fuzz)
        report.add(str(summary))
        if summary.failures:
            report.exit_status = 1
        return report
    sc = _load_scenario(args.scenario)
    report = Report("conformance %s" % args.scenario, _digest(sc))
    result, replay = conformance.check_run(sc.params(), sc.config())
    report.add("trace events: %d" % len(result.trace))
    if replay.ok:
        report.add("conformance: ok")
    else:
        report.add("conformance: DIVERGED at step %d: %s"
                   % (replay.index, replay.label))
        report.exit_status = 1
    return report


def _selector_net(selector):
    if selector == "machine":
        return build_machine()
    if selector == "client":
        return build_net(CatalogParams(machine_count=1, job_demands=[1]))
    if selector == "two-clients":
        return build_two_clients(CatalogParams(
            machine_count=3, job_demands=[3, 2], timeout=None))
    if selector == "full":
        return build_net(CatalogParams())
    return build_net(_load_scenario(selector).params())


def cmd_export_dot(args) -> Report:
    report = Report("export-dot %s" % args.selector)
    net = _selector_net(args.selector)
    if args.reach:
        g = analysis.explore_markings(net, bound=args.bound)
        if g.truncated:
            report.add("truncated: bound of %d states exceeded" % args.bound)
            report.exit_status = 2
            return report
        text = dot.reach_dot(g, name=net.name)
    else:
        text = dot.net_dot(net, name=net.name)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        report.add("dot: %s" % args.out)
    else:
        report.add(text.rstrip("\n"))
    return report


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qurdlab",
        description="Petri-net models, protocol simulator and conformance "
                    "checks for decentralized resource reservation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="explore a scenario's net and check "
                                       "properties")
    p.add_argument("scenario")
    p.add_argument("--property", dest="properties", action="append",
                   choices=PROPERTIES)
    p.add_argument("--bound", type=int, default=analysis.DEFAULT_BOUND)
    p.add_argument("--out", help="witness file path")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run the protocol simulator")
    p.add_argument("scenario")
    p.add_argument("--out", help="trace file path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("conformance", help="replay traces against the "
                                           "colored model")
    p.add_argument("scenario", nargs="?")
    p.add_argument("--fuzz", type=int, metavar="COUNT")
    p.set_defaults(func=cmd_conformance)

    p = sub.add_parser("export-dot", help="emit Graphviz text for a net or "
                                          "its reachability graph")
    p.add_argument("selector",
                   help="machine | client | two-clients | full | "
                        "a scenario file")
    p.add_argument("--reach", action="store_true",
                   help="export the reachability graph instead of the net")
    p.add_argument("--bound", type=int, default=dot.MAX_GRAPH_STATES)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "conformance" and (args.scenario is None) == \
            (args.fuzz is None):
        parser.error("conformance needs a scenario file or --fuzz COUNT")
    try:
        report = args.func(args)
    except (ScenarioError, OSError, dot.GraphTooLarge,
            analysis.Truncated) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    sys.stdout.write(report.render())
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
