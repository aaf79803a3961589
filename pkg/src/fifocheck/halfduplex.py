"""Half-duplex checks.

A mailbox execution is half-duplex when every process sends only while
its own mailbox is empty.  A mailbox system is half-duplex when every
execution is causally equivalent to a half-duplex one; this is only
semi-decided here, by bounded enumeration.  For binary systems the
notion is a property of configurations (one of the two buffers is
always empty).
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Sequence

from .causality import SR, Communication, action_graph, conflict_graph
from .greedy import check_greedy
from .model import BINARY, MAILBOX, Action, Configuration, FifoError, System, classify_topology, enabled
from .nfa import Nfa
from .oracle import Coverage, ExplorationBudget, enumerate_executions
from .safety import SHARP, Ctrl, NotMailbox, Property, candidate_controls, check_safety

HALF_DUPLEX, NOT_HALF_DUPLEX, UNKNOWN = "HalfDuplex", "NotHalfDuplex", "UnknownAtBound"
ORPHAN, NO_ORPHAN = "OrphanCandidate", "NoOrphanWithinBounds"


class NotBinary(FifoError):
    pass


def _require_mailbox(system: System) -> None:
    if classify_topology(system) not in (MAILBOX, BINARY):
        raise NotMailbox("half-duplex executions are defined for mailbox systems")


def _require_binary(system: System) -> None:
    if classify_topology(system) != BINARY:
        raise NotBinary("binary half-duplex needs two processes with one buffer each way")


def is_half_duplex_execution(system: System, execution: Sequence[Action]) -> bool:
    """Every send happens while the sender's own mailbox is empty."""
    _require_mailbox(system)
    pending: dict = defaultdict(int)
    for action in execution:
        if action.is_send:
            if pending[system.process_of(action)]:
                return False
            pending[action.buffer] += 1
        else:
            pending[action.buffer] -= 1
    return True


def is_binary_half_duplex_config(system: System, config: Configuration) -> bool:
    _require_binary(system)
    # a binary system may use a single buffer; the missing one counts as empty
    return sum(1 for _, content in config.buffers if content) <= 1


def has_half_duplex_linearization(system: System, execution: Sequence[Action]) -> tuple | None:
    """A half-duplex execution causally equivalent to ``execution``, if any.

    Linear extensions of the action graph are explored depth first; the
    buffer contents only depend on the set of placed actions, so dead
    sets are remembered.
    """
    execution = tuple(execution)
    if is_half_duplex_execution(system, execution):
        return execution
    graph = action_graph(system, execution)
    n = len(execution)
    preds = [0] * n
    for a, b in graph.edges:
        preds[b] |= 1 << a
    owners = graph.owners
    dead: set = set()
    full = (1 << n) - 1

    def extend(placed: int, pending: dict, order: list) -> bool:
        if placed == full:
            return True
        if placed in dead:
            return False
        for j in range(n):
            bit = 1 << j
            if placed & bit or preds[j] & ~placed:
                continue
            action = execution[j]
            if action.is_send:
                if pending.get(owners[j], 0):
                    continue
                pending[action.buffer] = pending.get(action.buffer, 0) + 1
            else:
                pending[action.buffer] -= 1
            order.append(j)
            if extend(placed | bit, pending, order):
                return True
            order.pop()
            pending[action.buffer] += -1 if action.is_send else 1
        dead.add(placed)
        return False

    order: list = []
    if extend(0, {}, order):
        return tuple(execution[j] for j in order)
    return None


@dataclass
class HalfDuplexVerdict:
    status: str
    witness: tuple = ()
    method: str = "exploration"
    bounds: dict = field(default_factory=dict)
    explored: int = 0

    @property
    def half_duplex(self) -> bool:
        return self.status == HALF_DUPLEX

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "method": self.method,
            "bounds": dict(self.bounds),
            "explored": self.explored,
            "witness": [str(a) for a in self.witness],
        }


def _both_nonempty_property(system: System) -> Property:
    """Binary configurations with both buffers nonempty."""
    messages = sorted(system.messages)
    transitions = [("start", Ctrl(c), "ctrl") for c in candidate_controls(system)]
    transitions.append(("ctrl", SHARP, "b1"))
    for m in messages:
        transitions += [("b1", m, "b1+"), ("b1+", m, "b1+"), ("b2", m, "b2+"), ("b2+", m, "b2+")]
    transitions.append(("b1+", SHARP, "b2"))
    automaton = Nfa(transitions=transitions, initials=["start"], finals=["b2+"])
    return Property("both-buffers-nonempty", automaton, system)


def check_binary_half_duplex(system: System, buffer_bound: int = 4, depth: int = 64) -> HalfDuplexVerdict:
    """Search reachable configurations for one with both buffers nonempty.

    Breadth-first exploration first; if it does not close within the
    bounds, fall back on the greedy and safety procedures.  A binary
    half-duplex system is greedy, so a non-greedy system is not
    half-duplex; a greedy one is half-duplex iff the configurations with
    both buffers nonempty are unreachable.
    """
    _require_binary(system)
    bounds = {"buffer_bound": buffer_bound, "depth": depth}
    start = system.initial_configuration()
    reached = {start: ()}
    queue = deque([start])
    closed = True
    while queue:
        config = queue.popleft()
        path = reached[config]
        if not is_binary_half_duplex_config(system, config):
            return HalfDuplexVerdict(NOT_HALF_DUPLEX, path, "exploration", bounds, len(reached))
        for action, succ in enabled(system, config):
            if succ in reached:
                continue
            if len(path) >= depth or any(len(q) > buffer_bound for _, q in succ.buffers):
                closed = False
                continue
            reached[succ] = path + (action,)
            queue.append(succ)
    if closed:
        return HalfDuplexVerdict(HALF_DUPLEX, (), "exploration", bounds, len(reached))

    greedy = check_greedy(system)
    if not greedy.greedy:
        # the non-greedy witness has a send while the sender's inbox is full
        for n in range(len(greedy.witness_actions) + 1):
            prefix = greedy.witness_actions[:n]
            pending: dict = defaultdict(int)
            for a in prefix:
                pending[a.buffer] += 1 if a.is_send else -1
            if all(pending[b] > 0 for b in system.buffer_order):
                return HalfDuplexVerdict(NOT_HALF_DUPLEX, prefix, "symbolic", bounds, len(reached))
        return HalfDuplexVerdict(UNKNOWN, (), "symbolic", bounds, len(reached))
    verdict = check_safety(system, _both_nonempty_property(system), assume_greedy=True)
    if verdict.safe:
        return HalfDuplexVerdict(HALF_DUPLEX, (), "symbolic", bounds, len(reached))
    return HalfDuplexVerdict(NOT_HALF_DUPLEX, verdict.witness_actions, "symbolic", bounds, len(reached))


def check_mailbox_half_duplex_bounded(system: System, depth: int = 10, max_nodes: int = 2_000_000) -> HalfDuplexVerdict:
    """Look for an execution of length at most ``depth`` with no half-duplex equivalent.

    ``HalfDuplex`` is only reported when every execution was enumerated,
    i.e. no execution reaches the depth with a move left.
    """
    _require_mailbox(system)
    bounds = {"depth": depth}
    enumeration = enumerate_executions(system, ExplorationBudget(depth=depth, max_nodes=max_nodes))
    count = 0
    for execution in enumeration:
        count += 1
        if has_half_duplex_linearization(system, execution) is None:
            return HalfDuplexVerdict(NOT_HALF_DUPLEX, execution, "enumeration", bounds, count)
    status = HALF_DUPLEX if enumeration.coverage.complete else UNKNOWN
    return HalfDuplexVerdict(status, (), "enumeration", bounds, count)


@dataclass
class OrphanVerdict:
    status: str
    execution: tuple = ()
    buffer: str | None = None
    message: str | None = None
    position: int | None = None
    coverage: Coverage = field(default_factory=Coverage)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "execution": [str(a) for a in self.execution],
            "buffer": self.buffer,
            "message": self.message,
            "position": self.position,
            "coverage": self.coverage.to_json(),
        }


def _can_drain(system: System, config: Configuration, buffer: str, needed: int, depth: int, buffer_bound: int) -> bool:
    """Whether ``needed`` receives on ``buffer`` can happen within the bounds."""
    seen = {(config, 0)}
    queue = deque([(config, 0, 0)])
    while queue:
        current, received, steps = queue.popleft()
        if received >= needed:
            return True
        if steps >= depth:
            continue
        for action, succ in enabled(system, current):
            if any(len(q) > buffer_bound for _, q in succ.buffers):
                continue
            count = received + (action.is_receive and action.buffer == buffer)
            if (succ, count) not in seen:
                seen.add((succ, count))
                queue.append((succ, count, steps + 1))
    return False


def check_no_orphan_bounded(system: System, depth: int = 10, buffer_bound: int = 3) -> OrphanVerdict:
    """Find a buffered message that no bounded continuation receives."""
    coverage = Coverage()
    start = system.initial_configuration()
    reached = {start: ()}
    queue = deque([start])
    while queue:
        config = queue.popleft()
        path = reached[config]
        for name, content in config.buffers:
            if content and not _can_drain(system, config, name, len(content), depth, buffer_bound):
                # the last message is the hardest to reach; find the first one that fails
                first = next(
                    k
                    for k in range(len(content))
                    if not _can_drain(system, config, name, k + 1, depth, buffer_bound)
                )
                return OrphanVerdict(ORPHAN, path, name, content[first], first, coverage)
        for action, succ in enabled(system, config):
            if succ in reached:
                continue
            if any(len(q) > buffer_bound for _, q in succ.buffers):
                coverage.buffer_pruned = True
                continue
            if len(path) >= depth:
                coverage.depth_cut = True
                continue
            reached[succ] = path + (action,)
            queue.append(succ)
    return OrphanVerdict(NO_ORPHAN, coverage=coverage)


@dataclass
class ClosingEdge:
    """Shape of the edge closing a conflict cycle rotated to start at its first send."""

    cycle: list
    kinds: frozenset
    first_send: int  # j_1
    receive: int | None  # k_1
    last_send: int  # j_n

    @property
    def is_sr(self) -> bool:
        return self.kinds == frozenset({SR})

    def shows_violation(self, system: System, execution: Sequence[Action]) -> bool:
        """``p->q!m1 ... q->r!m2 ... p->q?m1``: q sends with m1 still in its mailbox."""
        if self.receive is None:
            return False
        a1, an = execution[self.first_send], execution[self.last_send]
        return (
            self.first_send < self.last_send < self.receive
            and system.process_of(an) == a1.buffer
            and system.process_of(execution[self.receive]) == a1.buffer
        )


def closing_edge(system: System, execution: Sequence[Action], cycle: list[Communication]) -> ClosingEdge:
    execution = tuple(execution)
    graph = conflict_graph(system, execution)
    first = min(range(len(cycle)), key=lambda k: cycle[k].send)
    rotated = cycle[first:] + cycle[:first]
    c1, cn = rotated[0], rotated[-1]
    kinds = graph.edges.get((cn, c1), frozenset())
    return ClosingEdge(rotated, kinds, c1.send, c1.receive, cn.send)

