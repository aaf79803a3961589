"""Command line interface.

Exit codes: 0 the property holds (or no violation was found within the
bounds), 1 violation with a witness, 2 usage or input error, 3 a
precondition of the check fails (e.g. the system is not greedy).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .causality import action_graph, conflict_graph
from .dsl import ParseError, TopologyMismatch, load_system, parse_trace
from .greedy import ADJACENCY_MODES, FULL, check_greedy
from .halfduplex import (
    NOT_HALF_DUPLEX,
    ORPHAN,
    NotBinary,
    check_binary_half_duplex,
    check_mailbox_half_duplex_bounded,
    check_no_orphan_bounded,
)
from .model import BINARY, Configuration, FifoError, StepError, classify_topology, run
from .oracle import (
    ExplorationBudget,
    enumerate_executions,
    oracle_is_greedy_system,
    oracle_max_occupancy,
    oracle_reachable,
)
from .render import REDUCTIONS, emit_dot
from .safety import (
    MalformedProperty,
    NotGreedySystem,
    NotMailbox,
    UnknownControlState,
    build_property_progress,
    build_property_reach_config,
    build_property_reach_control,
    build_property_unspecified_reception,
    check_boundedness,
    check_safety,
    load_property,
)

OK, VIOLATION, USAGE, PRECONDITION = 0, 1, 2, 3

PROPERTY_KINDS = {"reach-control": 1, "reach-config": 1, "unspecified-reception": 0, "progress": 0, "nfa": 1}


class UsageError(Exception):
    pass


def _emit(args, data: dict, text: str) -> None:
    if args.json:
        print(json.dumps(data, indent=2))
    else:
        print(text)


def _actions(actions) -> str:
    return " ".join(map(str, actions)) or "(empty)"


def cmd_check_greedy(args) -> int:
    system = load_system(args.file)
    verdict = check_greedy(system, args.adjacency)
    text = verdict.status
    if not verdict.greedy:
        text += (
            f"\nwitness word: {' '.join(map(str, verdict.witness_word))}"
            f"\nwitness execution: {_actions(verdict.witness_actions)}"
            f"\nconflict cycle: {' -> '.join(map(str, verdict.conflict_cycle))}"
        )
    _emit(args, verdict.to_json(), text)
    return OK if verdict.greedy else VIOLATION


def _parse_property_args(tokens: list[str]) -> list[tuple]:
    specs = []
    rest = list(tokens)
    while rest:
        kind = rest.pop(0)
        if kind not in PROPERTY_KINDS:
            raise UsageError(f"unknown property {kind!r}; expected one of {sorted(PROPERTY_KINDS)}")
        if len(rest) < PROPERTY_KINDS[kind]:
            raise UsageError(f"property {kind} needs an argument")
        arg = rest.pop(0) if PROPERTY_KINDS[kind] else None
        specs.append((kind, arg))
    if not specs:
        raise UsageError("--property needs a property")
    return specs


def _build_property(system, kind: str, arg: str | None):
    if kind == "reach-control":
        return build_property_reach_control(system, [s for s in arg.replace(",", " ").split()])
    if kind == "reach-config":
        data = json.loads(Path(arg).read_text(encoding="utf-8"))
        return build_property_reach_config(system, Configuration.from_json(data))
    if kind == "unspecified-reception":
        return build_property_unspecified_reception(system)
    if kind == "progress":
        return build_property_progress(system)
    return load_property(system, arg)


def _safety_job(job: tuple) -> dict:
    path, kind, arg = job
    system = load_system(path)
    return check_safety(system, _build_property(system, kind, arg), assume_greedy=True).to_json()


def cmd_check_safety(args) -> int:
    system = load_system(args.file)
    specs = _parse_property_args(args.property)
    greedy = check_greedy(system)
    if not greedy.greedy:
        raise NotGreedySystem(greedy)
    for kind, arg in specs:  # report bad arguments before any work
        _build_property(system, kind, arg)
    jobs = [(str(args.file), kind, arg) for kind, arg in specs]
    if args.parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_safety_job, jobs))
    else:
        results = [_safety_job(job) for job in jobs]
    lines = []
    for result in results:
        lines.append(f"{result['property']}: {result['status']}")
        if result["status"] != "Safe":
            lines.append(f"  witness execution: {' '.join(result['witness_actions']) or '(empty)'}")
            lines.append(f"  configuration: {json.dumps(result['configuration'])}")
    data = results[0] if len(results) == 1 else {"results": results}
    _emit(args, data, "\n".join(lines))
    return OK if all(r["status"] == "Safe" for r in results) else VIOLATION


def cmd_check_bounded(args) -> int:
    system = load_system(args.file)
    verdict = check_boundedness(system)
    if verdict.bounded:
        text = f"Bounded (k = {verdict.k}); per buffer: " + ", ".join(
            f"{b}={k}" for b, k in verdict.bounds.items()
        )
    else:
        text = (
            f"Unbounded (buffer {verdict.buffer})\nprefix: {_actions(verdict.prefix_actions)}"
            f"\ncycle: {_actions(verdict.cycle_actions)}"
        )
    _emit(args, verdict.to_json(), text)
    return OK if verdict.bounded else VIOLATION


def cmd_check_half_duplex(args) -> int:
    system = load_system(args.file)
    if classify_topology(system) == BINARY:
        verdict = check_binary_half_duplex(system, args.buffer_bound, args.depth)
    else:
        verdict = check_mailbox_half_duplex_bounded(system, args.depth)
    text = f"{verdict.status} ({verdict.method}, bounds {verdict.bounds})"
    if verdict.witness:
        text += f"\nwitness execution: {_actions(verdict.witness)}"
    _emit(args, verdict.to_json(), text)
    return VIOLATION if verdict.status == NOT_HALF_DUPLEX else OK


def cmd_check_orphans(args) -> int:
    system = load_system(args.file)
    verdict = check_no_orphan_bounded(system, args.depth, args.buffer_bound)
    text = verdict.status
    if verdict.status == ORPHAN:
        text += f"\n{verdict.message} in buffer {verdict.buffer} after {_actions(verdict.execution)}"
    _emit(args, verdict.to_json(), text)
    return VIOLATION if verdict.status == ORPHAN else OK


def _load_trace(system, path):
    return parse_trace(system, Path(path).read_text(encoding="utf-8"))


def cmd_simulate(args) -> int:
    system = load_system(args.file)
    execution = _load_trace(system, args.trace)
    try:
        config = run(system, execution)
    except StepError as exc:
        _emit(args, {"executable": False, "index": exc.index, "error": str(exc)}, f"not executable: {exc}")
        return VIOLATION
    _emit(args, {"executable": True, "configuration": config.to_json()}, json.dumps(config.to_json()))
    return OK


def cmd_graph(args) -> int:
    system = load_system(args.file)
    execution = _load_trace(system, args.trace)
    actions = action_graph(system, execution)
    if args.kind == "action":
        dot = emit_dot(actions, args.reduce)
    else:
        dot = emit_dot(conflict_graph(system, execution), args.reduce, actions=actions)
    _emit(args, {"kind": args.kind, "reduce": args.reduce, "dot": dot}, dot.rstrip("\n"))
    return OK


def cmd_oracle(args) -> int:
    system = load_system(args.file)
    budget = ExplorationBudget(args.depth, args.buffer_bound, args.max_nodes)
    if args.report == "executions":
        enumeration = enumerate_executions(system, budget)
        executions = [[str(a) for a in e] for e in enumeration]
        data = {"executions": executions, "coverage": enumeration.coverage.to_json()}
        text = "\n".join(" ".join(e) if e else "." for e in executions)
    elif args.report == "greedy":
        result = oracle_is_greedy_system(system, budget)
        witness = [str(a) for a in result.counterexample or ()]
        data = {"greedy": result.greedy, "counterexample": witness, "coverage": result.coverage.to_json()}
        text = "greedy within budget" if result.greedy else "not greedy: " + " ".join(witness)
    elif args.report == "reachable":
        result = oracle_reachable(system, budget)
        configs = [c.to_json() for c in result.configurations]
        data = {"configurations": configs, "coverage": result.coverage.to_json()}
        text = "\n".join(json.dumps(c) for c in configs)
    else:
        occupancy, coverage = oracle_max_occupancy(system, budget)
        data = {"occupancy": occupancy, "coverage": coverage.to_json()}
        text = ", ".join(f"{b}={k}" for b, k in occupancy.items())
    _emit(args, data, text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print machine readable JSON")

    parser = argparse.ArgumentParser(prog="fifocheck", description="Check systems of communicating FIFO automata.")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="run a check on a system")
    checks = check.add_subparsers(dest="check", required=True)

    p = checks.add_parser("greedy", parents=[common], help="is every execution equivalent to a greedy one")
    p.add_argument("file", type=Path)
    p.add_argument("--adjacency", choices=ADJACENCY_MODES, default=FULL)
    p.set_defaults(func=cmd_check_greedy)

    p = checks.add_parser("safety", parents=[common], help="regular safety property (greedy systems)")
    p.add_argument("file", type=Path)
    p.add_argument(
        "--property",
        nargs="+",
        required=True,
        metavar="SPEC",
        help="reach-control STATES | reach-config FILE | unspecified-reception | progress | nfa FILE",
    )
    p.add_argument("--parallel", action="store_true", help="check several properties in parallel")
    p.set_defaults(func=cmd_check_safety)

    p = checks.add_parser("bounded", parents=[common], help="boundedness (greedy systems)")
    p.add_argument("file", type=Path)
    p.set_defaults(func=cmd_check_bounded)

    p = checks.add_parser("half-duplex", parents=[common], help="bounded half-duplex check")
    p.add_argument("file", type=Path)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--buffer-bound", type=int, default=4)
    p.set_defaults(func=cmd_check_half_duplex)

    p = checks.add_parser("orphans", parents=[common], help="bounded search for orphan messages")
    p.add_argument("file", type=Path)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--buffer-bound", type=int, default=3)
    p.set_defaults(func=cmd_check_orphans)

    p = commands.add_parser("simulate", parents=[common], help="replay a trace")
    p.add_argument("file", type=Path)
    p.add_argument("--trace", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = commands.add_parser("graph", parents=[common], help="DOT rendering of a trace's graphs")
    p.add_argument("file", type=Path)
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--kind", choices=("action", "conflict"), default="action")
    p.add_argument("--reduce", choices=REDUCTIONS, default="none", nargs="?", const="msc")
    p.set_defaults(func=cmd_graph)

    p = commands.add_parser("oracle", parents=[common], help="brute-force bounded exploration")
    p.add_argument("file", type=Path)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--buffer-bound", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=2_000_000)
    p.add_argument("--report", choices=("executions", "greedy", "reachable", "occupancy"), default="executions")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NotGreedySystem, NotMailbox, NotBinary) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return PRECONDITION
    except (
        OSError,
        ParseError,
        TopologyMismatch,
        UnknownControlState,
        MalformedProperty,
        UsageError,
        ValueError,
        FifoError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
