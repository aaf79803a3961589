"""Regular safety properties and boundedness of greedy systems.

A configuration is encoded as the word ``CTRL(l1,..,ln) # b1 # ... # bk``
where the whole control tuple is a single letter.  A property is an
automaton over such words.  Safety is decided on greedy executions only:
a pebble automaton reads communication words and checks, on the fly, that
the configuration they reach is accepted by the property automaton.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

from .greedy import (
    MATCHED,
    UNMATCHED,
    CommLetter,
    GreedyVerdict,
    build_greedy_prefix_automaton,
    check_greedy,
    communication_alphabet,
    expand,
)
from .model import BINARY, MAILBOX, Configuration, FifoError, System, classify_topology, run_all
from .model import product as product_automaton
from .nfa import Erased, Infinite, Nfa, erase_letters, find_accepting_word, finiteness_and_longest, intersect

SHARP = "#"

SAFE, UNSAFE = "Safe", "Unsafe"
BOUNDED, UNBOUNDED = "Bounded", "Unbounded"


class UnknownControlState(FifoError):
    pass


class NotMailbox(FifoError):
    pass


class NotGreedySystem(FifoError):
    def __init__(self, verdict: GreedyVerdict):
        super().__init__("the system is not greedy; witness " + " ".join(map(str, verdict.witness_word)))
        self.verdict = verdict


class MalformedProperty(FifoError):
    pass


@dataclass(frozen=True, order=True)
class Ctrl:
    """A global control tuple used as one letter of a configuration word."""

    control: tuple

    def __str__(self) -> str:
        return "CTRL(" + ",".join(self.control) + ")"

    @classmethod
    def parse(cls, text: str) -> "Ctrl":
        if not (text.startswith("CTRL(") and text.endswith(")")):
            raise ValueError(f"not a control letter: {text!r}")
        inner = text[5:-1]
        return cls(tuple(inner.split(",")) if inner else ())


def encode_configuration(system: System, config: Configuration) -> tuple:
    word: list = [Ctrl(tuple(config.control))]
    for name in system.buffer_order:
        word.append(SHARP)
        word.extend(config.queue(name))
    return tuple(word)


def decode_configuration(system: System, word: Iterable) -> Configuration:
    word = list(word)
    if not word or not isinstance(word[0], Ctrl):
        raise ValueError("a configuration word starts with a control letter")
    if len(word[0].control) != len(system.processes):
        raise ValueError("control letter has the wrong arity")
    contents: list[list] = []
    for letter in word[1:]:
        if letter == SHARP:
            contents.append([])
        elif isinstance(letter, Ctrl) or not contents:
            raise ValueError(f"unexpected letter {letter}")
        else:
            contents[-1].append(letter)
    if len(contents) != len(system.buffer_order):
        raise ValueError(f"expected {len(system.buffer_order)} buffers, found {len(contents)}")
    return Configuration(
        word[0].control,
        tuple((name, tuple(c)) for name, c in zip(system.buffer_order, contents)),
    )


@dataclass
class Property:
    name: str
    automaton: Nfa
    system: System = field(repr=False)

    def accepts(self, word: Iterable) -> bool:
        return self.automaton.accepts(word)

    def accepts_configuration(self, config: Configuration) -> bool:
        return self.accepts(encode_configuration(self.system, config))

    @cached_property
    def alphabet(self) -> frozenset:
        controls = {Ctrl(c) for c in self.system.control_states()}
        return frozenset(controls | {SHARP} | set(self.system.messages))


def _check_control(system: System, control: tuple) -> tuple:
    control = tuple(control)
    if len(control) != len(system.processes):
        raise UnknownControlState(
            f"control tuple has {len(control)} components, the system has {len(system.processes)} processes"
        )
    for (name, aut), state in zip(system.processes, control):
        if state not in aut.states:
            raise UnknownControlState(f"{name} has no state {state!r}")
    return control


# Buffer constraints for the chain builder.
ANY = ("any",)


def _head_not_in(forbidden: Iterable[str], allow_empty: bool) -> tuple:
    return ("head", frozenset(forbidden), allow_empty)


def build_property_reach_control(system: System, target: Iterable[str]) -> Property:
    control = _check_control(system, tuple(target))
    n = len(system.buffer_order)
    automaton = _build_chain(system, {tuple([ANY] * n): [control]})
    return Property(f"reach-control {Ctrl(control)}", automaton, system)


def _build_chain(system: System, branches: Mapping[tuple, Iterable[tuple]]) -> Nfa:
    """Words ``CTRL(l) # b1 # ... # bn`` where each buffer meets its constraint.

    ``branches`` maps a tuple of per-buffer constraints to the control
    tuples it applies to.
    """
    messages = sorted(system.messages)
    n = len(system.buffer_order)
    start = ("start",)
    transitions = []
    finals = []
    for b, (constraints, controls) in enumerate(sorted(branches.items(), key=repr)):
        # state (b, k, 0): just read the k-th '#', buffer k empty so far
        # state (b, k, 1): buffer k nonempty and its constraint satisfied
        # (b, -1, 1) is the state right after the control letter
        for control in sorted(controls):
            transitions.append((start, Ctrl(tuple(control)), (b, -1, 1)))

        def done(k):
            # states from which buffer k may be closed
            if k < 0:
                return [(b, k, 1)]
            constraint = constraints[k]
            may_be_empty = constraint == ANY or constraint[2]
            return [(b, k, 1)] + ([(b, k, 0)] if may_be_empty else [])

        for k in range(n):
            for src in done(k - 1):
                transitions.append((src, SHARP, (b, k, 0)))
            constraint = constraints[k]
            forbidden = frozenset() if constraint == ANY else constraint[1]
            for m in messages:
                if m not in forbidden:
                    transitions.append(((b, k, 0), m, (b, k, 1)))
                transitions.append(((b, k, 1), m, (b, k, 1)))
        finals.extend(done(n - 1))
    return Nfa(states=[start], transitions=transitions, initials=[start], finals=finals)


def build_property_reach_config(system: System, target: Configuration) -> Property:
    control = _check_control(system, tuple(target.control))
    names = tuple(name for name, _ in target.buffers)
    if names != system.buffer_order:
        raise ValueError(f"configuration buffers {names} do not match {system.buffer_order}")
    unknown = {m for _, q in target.buffers for m in q} - set(system.messages)
    if unknown:
        raise ValueError(f"unknown messages {sorted(unknown)}")
    word = encode_configuration(system, Configuration(control, target.buffers))
    transitions = [(k, letter, k + 1) for k, letter in enumerate(word)]
    automaton = Nfa(states=range(len(word) + 1), transitions=transitions, initials=[0], finals=[len(word)])
    return Property("reach-config", automaton, system)


def candidate_controls(system: System) -> list[tuple]:
    # controls reachable in the product, ignoring buffers: a superset of the reachable ones
    return sorted(product_automaton(system).reachable_states())


def build_property_unspecified_reception(system: System) -> Property:
    """Configurations where a process in a receiving state cannot take the head of its mailbox."""
    if classify_topology(system) not in (MAILBOX, BINARY):
        raise NotMailbox("unspecified reception is defined for mailbox systems")
    n = len(system.buffer_order)
    branches: dict = {}
    for control in candidate_controls(system):
        for k, (name, aut) in enumerate(system.processes):
            state = control[k]
            if name not in system.buffer_index or not aut.is_receiving_state(state):
                continue
            constraints = [ANY] * n
            constraints[system.buffer_index[name]] = _head_not_in(aut.ready_set(state, name), False)
            branches.setdefault(tuple(constraints), []).append(control)
    return Property("unspecified-reception", _build_chain(system, branches), system)


def build_property_progress(system: System) -> Property:
    """Configurations that are not final and where no action is enabled."""
    n = len(system.buffer_order)
    branches: dict = {}
    for control in candidate_controls(system):
        if system.is_final_control(control):
            continue
        if any(a.is_send for a, _ in system.control_moves(control)):
            continue
        ready: dict = {name: set() for name in system.buffer_order}
        for action, _ in system.control_moves(control):
            ready[action.buffer].add(action.message)
        constraints = tuple(
            _head_not_in(ready[name], True) if ready[name] else ANY for name in system.buffer_order
        )
        branches.setdefault(constraints, []).append(control)
    return Property("progress", _build_chain(system, branches), system)


def property_from_json(system: System, data: Mapping, name: str = "nfa") -> Property:
    """Property automaton from ``{states, initials, finals, transitions}``."""
    try:
        states = list(data["states"])
        initials = list(data["initials"])
        finals = list(data["finals"])
        raw = list(data["transitions"])
    except (KeyError, TypeError) as exc:
        raise MalformedProperty(f"missing field {exc}") from None
    declared = set(states)
    transitions = []
    for entry in raw:
        if len(entry) != 3:
            raise MalformedProperty(f"transition {entry!r} is not [src, letter, dst]")
        src, text, dst = entry
        for s in (src, dst):
            if s not in declared:
                raise MalformedProperty(f"undeclared state {s!r}")
        if text == SHARP:
            letter = SHARP
        elif str(text).startswith("CTRL("):
            letter = Ctrl.parse(text)
            try:
                _check_control(system, letter.control)
            except UnknownControlState as exc:
                raise MalformedProperty(str(exc)) from None
        elif text in system.messages:
            letter = text
        else:
            raise MalformedProperty(f"unknown letter {text!r}")
        transitions.append((src, letter, dst))
    for s in initials + finals:
        if s not in declared:
            raise MalformedProperty(f"undeclared state {s!r}")
    return Property(name, Nfa(states, None, transitions, initials, finals), system)


def load_property(system: System, path: str | Path) -> Property:
    return property_from_json(system, json.loads(Path(path).read_text(encoding="utf-8")), Path(path).stem)


def build_pebble_automaton(system: System, prop: Property) -> Nfa:
    """Communication words of greedy executions reaching a configuration of ``prop``.

    States are ``(control, final_control, pebbles, starts)``.  Pebble ``i``
    runs the property automaton over the unmatched messages of buffer
    ``i``; ``starts`` keeps the position each pebble began from so that the
    pieces can be glued with ``#`` moves at the end.  Initial positions of
    pebble ``i+1`` are only guessed among states one ``#`` away from
    something pebble ``i`` can reach, which loses no accepting run.
    """
    a = prop.automaton
    n = len(system.buffer_order)
    buffer_index = system.buffer_index
    messages = sorted(system.messages)

    def reach_by_messages(state) -> set:
        seen = a.closure([state])
        stack = list(seen)
        while stack:
            s = stack.pop()
            for m in messages:
                for t in a.read([s], m):
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
        return seen

    def start_tuples(first: set):
        def extend(prefix):
            if len(prefix) == n:
                yield prefix
                return
            if not prefix:
                options = first
            else:
                options = set()
                for s in reach_by_messages(prefix[-1]):
                    options |= a.read([s], SHARP)
            for option in sorted(options, key=repr):
                yield from extend(prefix + (option,))

        yield from extend(())

    initials = []
    for final_control in candidate_controls(system):
        after = a.read(a.initials, Ctrl(final_control))
        if n == 0:
            if any(a.is_final(s) for s in after):
                initials.append((system.initial_control, final_control, (), ()))
            continue
        first = a.read(after, SHARP)
        for starts in start_tuples(first):
            initials.append((system.initial_control, final_control, starts, starts))

    def is_final(state) -> bool:
        control, final_control, pebbles, starts = state
        if control != final_control:
            return False
        if n == 0:
            return True
        for i in range(n - 1):
            if starts[i + 1] not in a.read([pebbles[i]], SHARP):
                return False
        return any(a.is_final(s) for s in a.closure([pebbles[-1]]))

    def successors(state):
        control, final_control, pebbles, starts = state
        for letter in communication_alphabet_cache:
            controls = [control]
            for action in letter.actions():
                controls = [d for c in controls for d in system.control_successors(c, action)]
            if not controls:
                continue
            if letter.kind == MATCHED:
                for c in controls:
                    yield letter, (c, final_control, pebbles, starts)
            elif letter.kind == UNMATCHED:
                i = buffer_index[letter.buffer]
                for moved in sorted(a.read([pebbles[i]], letter.message), key=repr):
                    new = pebbles[:i] + (moved,) + pebbles[i + 1:]
                    for c in controls:
                        yield letter, (c, final_control, new, starts)

    communication_alphabet_cache = sorted(communication_alphabet(system))
    return Nfa.lazy(initials, successors, is_final, frozenset(communication_alphabet_cache))


@dataclass
class SafetyVerdict:
    status: str
    property_name: str
    witness_word: list = field(default_factory=list)
    witness_actions: tuple = ()
    configuration: Configuration | None = None

    @property
    def safe(self) -> bool:
        return self.status == SAFE

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "property": self.property_name,
            "witness_word": [str(c) for c in self.witness_word],
            "witness_actions": [str(a) for a in self.witness_actions],
            "configuration": None if self.configuration is None else self.configuration.to_json(),
        }


def _require_greedy(system: System, assume_greedy: bool) -> None:
    if not assume_greedy:
        verdict = check_greedy(system)
        if not verdict.greedy:
            raise NotGreedySystem(verdict)


def check_safety(system: System, prop: Property, assume_greedy: bool = False) -> SafetyVerdict:
    """Whether no reachable configuration is accepted by ``prop``."""
    _require_greedy(system, assume_greedy)
    word = find_accepting_word(intersect(build_greedy_prefix_automaton(system), build_pebble_automaton(system, prop)))
    if word is None:
        return SafetyVerdict(SAFE, prop.name)
    actions = expand(word)
    for config in run_all(system, actions):
        if prop.accepts_configuration(config):
            return SafetyVerdict(UNSAFE, prop.name, list(word), actions, config)
    raise FifoError(f"internal error: witness {' '.join(map(str, word))} does not reach the property")


@dataclass
class BoundednessVerdict:
    status: str
    bounds: dict = field(default_factory=dict)
    prefix_word: list = field(default_factory=list)
    cycle_word: list = field(default_factory=list)
    buffer: str | None = None

    @property
    def bounded(self) -> bool:
        return self.status == BOUNDED

    @property
    def k(self) -> int | None:
        return max(self.bounds.values(), default=0) if self.bounded else None

    @property
    def prefix_actions(self) -> tuple:
        return expand(self.prefix_word)

    @property
    def cycle_actions(self) -> tuple:
        return expand(self.cycle_word)

    def pumped(self, times: int) -> tuple:
        return self.prefix_actions + self.cycle_actions * times

    def to_json(self) -> dict:
        data: dict = {"status": self.status}
        if self.bounded:
            data["bounds"] = dict(self.bounds)
            data["k"] = self.k
        else:
            data["buffer"] = self.buffer
            data["prefix"] = [str(a) for a in self.prefix_actions]
            data["cycle"] = [str(a) for a in self.cycle_actions]
        return data


def _unerase(letters: list) -> list:
    return [letter.letter if isinstance(letter, Erased) else letter for letter in letters]


def check_boundedness(system: System, assume_greedy: bool = False) -> BoundednessVerdict:
    """Erase matched letters from greedy words and look for an unbounded buffer.

    Every send is first seen unmatched in some greedy prefix, so the
    longest erased image already covers the occupancy a matched exchange
    causes for a moment.
    """
    _require_greedy(system, assume_greedy)
    erased = erase_letters(build_greedy_prefix_automaton(system), lambda c: c.kind == UNMATCHED)
    result = finiteness_and_longest(
        erased,
        lambda c: c.buffer if isinstance(c, CommLetter) and c.kind == UNMATCHED else None,
        system.buffer_order,
    )
    if isinstance(result, Infinite):
        return BoundednessVerdict(
            UNBOUNDED,
            prefix_word=_unerase(result.prefix),
            cycle_word=_unerase(result.cycle),
            buffer=result.letter_class,
        )
    return BoundednessVerdict(BOUNDED, bounds={b: result.get(b, 0) for b in system.buffer_order})
