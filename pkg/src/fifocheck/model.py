"""FIFO automata, systems of FIFO automata and their step semantics.

A system is a family of FIFO automata with pairwise disjoint action sets,
so every action identifies the process that performs it.  Buffers are
opaque string identifiers shared by all processes of the system.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

SEND = "!"
RECEIVE = "?"

# p2p buffers are written "p.q" (from p to q)
P2P_SEPARATOR = "."


class FifoError(Exception):
    pass


class StepError(FifoError):
    """A step (or the step at ``index`` of a run) is not possible."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index

    def __str__(self) -> str:
        base = super().__str__()
        return base if self.index is None else f"action {self.index}: {base}"


class NoSuchTransition(StepError):
    pass


class EmptyBuffer(StepError):
    pass


class HeadMismatch(StepError):
    pass


@dataclass(frozen=True, order=True)
class Action:
    buffer: str
    kind: str
    message: str

    def __post_init__(self):
        if self.kind not in (SEND, RECEIVE):
            raise ValueError(f"bad action kind {self.kind!r}")

    @property
    def is_send(self) -> bool:
        return self.kind == SEND

    @property
    def is_receive(self) -> bool:
        return self.kind == RECEIVE

    def __str__(self) -> str:
        return f"{self.buffer}{self.kind}{self.message}"

    @classmethod
    def parse(cls, text: str) -> "Action":
        for kind in (SEND, RECEIVE):
            buf, sep, msg = text.partition(kind)
            if sep and buf and msg and not any(op in buf + msg for op in (SEND, RECEIVE)):
                return cls(buf, kind, msg)
        raise ValueError(f"cannot parse action {text!r}")


def send(buffer: str, message: str) -> Action:
    return Action(buffer, SEND, message)


def receive(buffer: str, message: str) -> Action:
    return Action(buffer, RECEIVE, message)


Execution = tuple  # tuple[Action, ...]
Transition = tuple  # (state, Action, state)


@dataclass(frozen=True)
class FifoAutomaton:
    states: frozenset
    messages: frozenset
    buffers: frozenset
    actions: frozenset
    transitions: tuple
    initial: str

    @classmethod
    def from_transitions(
        cls,
        initial: str,
        transitions: Iterable[tuple[str, Action, str]],
        states: Iterable[str] = (),
    ) -> "FifoAutomaton":
        """Build an automaton whose sets are inferred from its transitions."""
        transitions = tuple(transitions)
        all_states = {initial, *states}
        for src, _, dst in transitions:
            all_states.update((src, dst))
        actions = frozenset(a for _, a, _ in transitions)
        return cls(
            states=frozenset(all_states),
            messages=frozenset(a.message for a in actions),
            buffers=frozenset(a.buffer for a in actions),
            actions=actions,
            transitions=transitions,
            initial=initial,
        )

    @property
    def size(self) -> int:
        return len(self.states) + len(self.transitions)

    def buffers_of_kind(self, kind: str) -> frozenset:
        return frozenset(a.buffer for a in self.actions if a.kind == kind)

    @cached_property
    def outgoing(self) -> Mapping[str, tuple]:
        out: dict[str, list] = {s: [] for s in self.states}
        for src, action, dst in self.transitions:
            out.setdefault(src, []).append((action, dst))
        return {s: tuple(v) for s, v in out.items()}

    def is_receiving_state(self, state: str) -> bool:
        # vacuously true for states without outgoing transitions
        return all(a.is_receive for a, _ in self.outgoing.get(state, ()))

    def ready_set(self, state: str, buffer: str | None = None) -> frozenset:
        return frozenset(
            a.message
            for a, _ in self.outgoing.get(state, ())
            if a.is_receive and (buffer is None or a.buffer == buffer)
        )


@dataclass(frozen=True)
class Configuration:
    """Global control state plus the content of every buffer.

    ``buffers`` is a tuple of ``(buffer, messages)`` pairs in the system's
    buffer order; the front of each queue is the first message.
    """

    control: tuple
    buffers: tuple

    def queue(self, buffer: str) -> tuple:
        for name, content in self.buffers:
            if name == buffer:
                return content
        raise KeyError(buffer)

    def occupancy(self) -> dict[str, int]:
        return {name: len(content) for name, content in self.buffers}

    def to_json(self) -> dict:
        return {
            "control": list(self.control),
            "buffers": {name: list(content) for name, content in self.buffers},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Configuration":
        return cls(
            tuple(data["control"]),
            tuple((name, tuple(msgs)) for name, msgs in data["buffers"].items()),
        )


@dataclass(frozen=True)
class System:
    processes: tuple  # ((name, FifoAutomaton), ...)
    buffer_order: tuple = ()

    @classmethod
    def build(
        cls,
        processes: Mapping[str, FifoAutomaton] | Sequence[tuple[str, FifoAutomaton]],
        buffer_order: Sequence[str] | None = None,
    ) -> "System":
        """Assemble a system; buffers default to first-appearance order."""
        items = tuple(processes.items() if isinstance(processes, Mapping) else processes)
        if buffer_order is None:
            seen: dict[str, None] = {}
            for _, aut in items:
                for _, action, _ in aut.transitions:
                    seen.setdefault(action.buffer, None)
            buffer_order = tuple(seen)
        return cls(items, tuple(buffer_order))

    @cached_property
    def names(self) -> tuple:
        return tuple(name for name, _ in self.processes)

    @cached_property
    def automata(self) -> dict[str, FifoAutomaton]:
        return dict(self.processes)

    @cached_property
    def process_index(self) -> dict[str, int]:
        return {name: k for k, name in enumerate(self.names)}

    @cached_property
    def buffer_index(self) -> dict[str, int]:
        return {name: k for k, name in enumerate(self.buffer_order)}

    @cached_property
    def owners(self) -> dict[Action, str]:
        owners: dict[Action, str] = {}
        for name, aut in self.processes:
            for action in aut.actions:
                owners.setdefault(action, name)
        return owners

    def process_of(self, action: Action) -> str:
        try:
            return self.owners[action]
        except KeyError:
            raise NoSuchTransition(f"no process performs {action}") from None

    @cached_property
    def actions(self) -> frozenset:
        return frozenset(self.owners)

    @cached_property
    def messages(self) -> frozenset:
        return frozenset().union(*(aut.messages for _, aut in self.processes))

    @property
    def size(self) -> int:
        return sum(aut.size for _, aut in self.processes)

    @cached_property
    def initial_control(self) -> tuple:
        return tuple(aut.initial for _, aut in self.processes)

    def initial_configuration(self) -> Configuration:
        return Configuration(self.initial_control, tuple((b, ()) for b in self.buffer_order))

    def control_moves(self, control: tuple) -> Iterator[tuple[Action, tuple]]:
        """Product-automaton transitions out of a global control state."""
        for k, (_, aut) in enumerate(self.processes):
            for action, dst in aut.outgoing.get(control[k], ()):
                yield action, control[:k] + (dst,) + control[k + 1:]

    def control_successors(self, control: tuple, action: Action) -> list[tuple]:
        k = self.process_index[self.process_of(action)]
        aut = self.processes[k][1]
        return [
            control[:k] + (dst,) + control[k + 1:]
            for a, dst in aut.outgoing.get(control[k], ())
            if a == action
        ]

    def control_states(self) -> Iterator[tuple]:
        """All global control states (exponential in the number of processes)."""
        per_process = [sorted(aut.states) for _, aut in self.processes]
        return itertools.product(*per_process)

    def is_final_control(self, control: tuple) -> bool:
        return next(self.control_moves(control), None) is None


@dataclass(frozen=True)
class Product:
    """Lazily explored asynchronous product of a system.

    States are global control tuples; transitions are computed on demand.
    """

    system: System
    _visited: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def initial(self) -> tuple:
        return self.system.initial_control

    def successors(self, control: tuple) -> tuple:
        if control not in self._visited:
            self._visited[control] = tuple(self.system.control_moves(control))
        return self._visited[control]

    def reachable_states(self) -> set:
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            current = stack.pop()
            for _, nxt in self.successors(current):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def transitions(self) -> list[tuple]:
        return [(s, a, d) for s in self.reachable_states() for a, d in self.successors(s)]

    def materialize(self) -> FifoAutomaton:
        return FifoAutomaton.from_transitions(self.initial, self.transitions(), self.reachable_states())

    def accepts_path(self, execution: Sequence[Action]) -> bool:
        current = {self.initial}
        for action in execution:
            current = {d for s in current for a, d in self.successors(s) if a == action}
            if not current:
                return False
        return True


def product(system: System) -> Product:
    return Product(system)


def validate_system(system: System) -> list[str]:
    """Return human-readable diagnostics; an empty list means well formed."""
    diagnostics = []
    names = [name for name, _ in system.processes]
    for name in {n for n in names if names.count(n) > 1}:
        diagnostics.append(f"duplicate process name {name!r}")
    for name, aut in system.processes:
        if aut.initial not in aut.states:
            diagnostics.append(f"process {name}: initial state {aut.initial!r} not a state")
        for src, action, dst in aut.transitions:
            for state in (src, dst):
                if state not in aut.states:
                    diagnostics.append(f"process {name}: transition uses unknown state {state!r}")
            if action not in aut.actions:
                diagnostics.append(f"process {name}: action {action} not declared")
        for action in aut.actions:
            if action.message not in aut.messages:
                diagnostics.append(f"process {name}: message {action.message!r} not declared")
            if action.buffer not in aut.buffers:
                diagnostics.append(f"process {name}: buffer {action.buffer!r} not declared")
    for (p, a), (q, b) in itertools.combinations(system.processes, 2):
        shared = a.actions & b.actions
        if shared:
            listed = ", ".join(sorted(map(str, shared)))
            diagnostics.append(f"action sets not disjoint: {p} and {q} share {listed}")
    used = set().union(*(aut.buffers for _, aut in system.processes)) if system.processes else set()
    order = list(system.buffer_order)
    if len(set(order)) != len(order):
        diagnostics.append("buffer order lists a buffer twice")
    if set(order) != used:
        missing = sorted(used - set(order))
        extra = sorted(set(order) - used)
        diagnostics.append(f"buffer order mismatch: missing {missing}, unused {extra}")
    return diagnostics


BINARY, MAILBOX, P2P, GENERAL = "binary", "mailbox", "p2p", "general"


def _is_mailbox(system: System) -> bool:
    names = set(system.names)
    for name, aut in system.processes:
        if not aut.buffers_of_kind(SEND) <= names - {name}:
            return False
        if not aut.buffers_of_kind(RECEIVE) <= {name}:
            return False
    return True


def _is_p2p(system: System) -> bool:
    names = set(system.names)
    for name, aut in system.processes:
        outgoing = {f"{name}{P2P_SEPARATOR}{q}" for q in names - {name}}
        incoming = {f"{q}{P2P_SEPARATOR}{name}" for q in names - {name}}
        if not aut.buffers_of_kind(SEND) <= outgoing:
            return False
        if not aut.buffers_of_kind(RECEIVE) <= incoming:
            return False
    return True


def classify_topology(system: System) -> str:
    """Most specific of binary, mailbox, p2p and general.

    Buffer sets are checked by inclusion: a process need not use every
    buffer it is allowed to use.
    """
    mailbox, p2p = _is_mailbox(system), _is_p2p(system)
    if len(system.processes) == 2 and (mailbox or p2p):
        return BINARY
    if mailbox:
        return MAILBOX
    if p2p:
        return P2P
    return GENERAL


def inbox(system: System, process: str) -> tuple:
    """Buffers the process reads from, plus its mailbox if it has one."""
    aut = system.automata[process]
    buffers = set(aut.buffers_of_kind(RECEIVE))
    if process in system.buffer_index:
        buffers.add(process)
    return tuple(b for b in system.buffer_order if b in buffers)


def step(system: System, config: Configuration, action: Action) -> Configuration:
    """Perform one action.

    For a non-deterministic automaton the first matching transition (in
    declaration order) is taken; :func:`successors` returns all of them.
    """
    return _step_all(system, config, action)[0]


def _step_all(system: System, config: Configuration, action: Action) -> list[Configuration]:
    controls = system.control_successors(config.control, action)
    if not controls:
        owner = system.process_of(action)
        state = config.control[system.process_index[owner]]
        raise NoSuchTransition(f"{owner} has no transition {action} from state {state}")
    k = system.buffer_index[action.buffer]
    name, content = config.buffers[k]
    if action.is_send:
        content = content + (action.message,)
    else:
        if not content:
            raise EmptyBuffer(f"cannot receive {action}: buffer {name} is empty")
        if content[0] != action.message:
            raise HeadMismatch(f"cannot receive {action}: head of {name} is {content[0]}")
        content = content[1:]
    buffers = config.buffers[:k] + ((name, content),) + config.buffers[k + 1:]
    return [Configuration(control, buffers) for control in controls]


def successors(system: System, config: Configuration, action: Action) -> list[Configuration]:
    try:
        return _step_all(system, config, action)
    except StepError:
        return []


def run_all(system: System, execution: Iterable[Action]) -> list[Configuration]:
    """Every configuration an execution can end in, in declaration order.

    Raises the first :class:`StepError` with its index set.
    """
    current = [system.initial_configuration()]
    for index, action in enumerate(execution):
        nxt: list[Configuration] = []
        error = None
        for config in current:
            try:
                for succ in _step_all(system, config, action):
                    if succ not in nxt:
                        nxt.append(succ)
            except StepError as exc:
                error = exc
        if not nxt:
            assert error is not None
            error.index = index
            raise error
        current = nxt
    return current


def run(system: System, execution: Iterable[Action]) -> Configuration:
    """Replay an execution from the initial configuration.

    Non-deterministic automata are handled by tracking every reachable
    configuration; the result is the first one in declaration order.
    """
    return run_all(system, execution)[0]


def is_execution(system: System, execution: Iterable[Action]) -> bool:
    try:
        run(system, execution)
    except StepError:
        return False
    return True


def enabled(system: System, config: Configuration) -> list[tuple[Action, Configuration]]:
    """Every action that can fire from ``config`` with its successor."""
    result = []
    for action, control in system.control_moves(config.control):
        k = system.buffer_index[action.buffer]
        name, content = config.buffers[k]
        if action.is_send:
            content = content + (action.message,)
        elif content and content[0] == action.message:
            content = content[1:]
        else:
            continue
        buffers = config.buffers[:k] + ((name, content),) + config.buffers[k + 1:]
        result.append((action, Configuration(control, buffers)))
    return result
