"""Deciding whether every execution of a system can be made greedy.

Greedy executions are written over communication letters: ``i!m`` for a
send that is never received, ``i!?m`` for a send immediately followed by
its receive.  A borderline violation is a greedy word followed by one
receive letter ``i?m`` that closes a cycle in the conflict graph.  The
system is greedy iff the automaton of greedy words and the automaton of
cycle-closing words have disjoint languages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .causality import Communication, conflict_graph, matching_pairs
from .model import Action, System, receive, send
from .nfa import Nfa, find_accepting_word, intersect

UNMATCHED, MATCHED, RECEIVE_LETTER = "!", "!?", "?"

FULL, PAPER = "full", "paper"
ADJACENCY_MODES = (FULL, PAPER)

GR_FINAL = ("l_F",)
BV_START = ("l_bv0",)
BV_ACCEPT = ("l_bv1",)

GREEDY, NOT_GREEDY = "Greedy", "NotGreedy"


@dataclass(frozen=True, order=True)
class CommLetter:
    buffer: str
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.buffer}{self.kind}{self.message}"

    @classmethod
    def parse(cls, text: str) -> "CommLetter":
        for kind in (MATCHED, UNMATCHED, RECEIVE_LETTER):
            buf, sep, msg = text.partition(kind)
            if sep and buf and msg:
                return cls(buf, kind, msg)
        raise ValueError(f"cannot parse communication letter {text!r}")

    def actions(self) -> tuple:
        if self.kind == UNMATCHED:
            return (send(self.buffer, self.message),)
        if self.kind == MATCHED:
            return (send(self.buffer, self.message), receive(self.buffer, self.message))
        return (receive(self.buffer, self.message),)


def communication_alphabet(system: System) -> frozenset:
    """Unmatched and matched send letters that the system can produce."""
    letters = set()
    for action in system.actions:
        if action.is_send:
            letters.add(CommLetter(action.buffer, UNMATCHED, action.message))
            if receive(action.buffer, action.message) in system.owners:
                letters.add(CommLetter(action.buffer, MATCHED, action.message))
    return frozenset(letters)


def receive_alphabet(system: System) -> frozenset:
    return frozenset(
        CommLetter(a.buffer, RECEIVE_LETTER, a.message) for a in system.actions if a.is_receive
    )


def expand(word: Iterable[CommLetter]) -> tuple:
    return tuple(a for letter in word for a in letter.actions())


def to_word(execution: Sequence[Action]) -> list[CommLetter]:
    """Communication letters of a greedy execution; other receives stay lone ``i?m`` letters."""
    execution = tuple(execution)
    partner = {c.send: c.receive for c in matching_pairs(execution)}
    word = []
    j = 0
    while j < len(execution):
        a = execution[j]
        if a.is_receive:
            word.append(CommLetter(a.buffer, RECEIVE_LETTER, a.message))
        elif partner.get(j) == j + 1:
            word.append(CommLetter(a.buffer, MATCHED, a.message))
            j += 1
        else:
            word.append(CommLetter(a.buffer, UNMATCHED, a.message))
        j += 1
    return word


def letter_processes(system: System, letter: CommLetter) -> frozenset:
    return frozenset(system.process_of(a) for a in letter.actions())


def adjacency(system: System, mode: str = FULL) -> Callable[[CommLetter, CommLetter], bool]:
    """Whether two communication letters can be linked by a conflict edge.

    ``paper`` mode links letters whose processes overlap; ``full`` mode
    also links actions of the same kind on the same buffer, which is
    exactly non-commutation of some pair of their actions.
    """
    if mode not in ADJACENCY_MODES:
        raise ValueError(f"unknown adjacency mode {mode!r}")
    cache: dict = {}

    def adjacent(c1: CommLetter, c2: CommLetter) -> bool:
        key = (c1, c2)
        if key not in cache:
            if letter_processes(system, c1) & letter_processes(system, c2):
                cache[key] = True
            elif mode == PAPER:
                cache[key] = False
            else:
                cache[key] = any(
                    a.kind == b.kind and a.buffer == b.buffer
                    for a in c1.actions()
                    for b in c2.actions()
                )
        return cache[key]

    return adjacent


def _greedy_successors(system: System, state, with_guess: bool):
    if state == GR_FINAL:
        return
    control, guess, nonempty = state
    bits = system.buffer_index
    for action, after_send in system.control_moves(control):
        i, m = action.buffer, action.message
        bit = 1 << bits[i]
        if action.is_send:
            letter = CommLetter(i, UNMATCHED, m)
            yield letter, (after_send, guess, nonempty | bit)
            if with_guess and guess is None and not nonempty & bit:
                yield letter, (after_send, (i, m), nonempty | bit)
            # a matched send needs its buffer empty: the receive takes the head
            rec = receive(i, m)
            if not nonempty & bit and rec in system.owners:
                for after_receive in system.control_successors(after_send, rec):
                    yield CommLetter(i, MATCHED, m), (after_receive, guess, nonempty)
        elif with_guess and guess == (i, m):
            yield CommLetter(i, RECEIVE_LETTER, m), GR_FINAL


def build_greedy_automaton(system: System) -> Nfa:
    """Greedy words followed by one receive of the first pending message of some buffer.

    States are ``(control, guess, nonempty)`` where ``guess`` is the
    (buffer, message) of the unmatched send whose receive will end the
    word and ``nonempty`` is a bit set over the buffer order.
    """
    return Nfa.lazy(
        [(system.initial_control, None, 0)],
        lambda s: _greedy_successors(system, s, True),
        lambda s: s == GR_FINAL,
        communication_alphabet(system) | receive_alphabet(system),
    )


def build_greedy_prefix_automaton(system: System) -> Nfa:
    """Communication words of all greedy executions (every state accepts)."""
    return Nfa.lazy(
        [(system.initial_control, None, 0)],
        lambda s: _greedy_successors(system, s, False),
        lambda s: True,
        communication_alphabet(system),
    )


def build_violation_automaton(
    sigma: Iterable[CommLetter],
    receives: Iterable[CommLetter],
    adjacent: Callable[[CommLetter, CommLetter], bool],
) -> Nfa:
    """Words ``w·i?m`` whose conflict graph has a cycle through the final receive.

    A path state ``(target, last, moved)`` remembers the receive that must
    close the cycle, the last communication on the conflict path, and
    whether the path has left the guessed send.
    """
    sigma = sorted(sigma)
    receives = frozenset(receives)

    def successors(state):
        if state == BV_START:
            for c in sigma:
                yield c, BV_START
                target = CommLetter(c.buffer, RECEIVE_LETTER, c.message)
                if c.kind == UNMATCHED and target in receives:
                    yield c, (target, c, False)
        elif state != BV_ACCEPT:
            target, last, moved = state
            for c in sigma:
                yield c, state
                if adjacent(last, c):
                    yield c, (target, c, True)
            if moved and adjacent(last, target):
                yield target, BV_ACCEPT

    return Nfa.lazy([BV_START], successors, lambda s: s == BV_ACCEPT, frozenset(sigma) | receives)


@dataclass
class GreedyVerdict:
    status: str
    witness_word: list = field(default_factory=list)
    witness_actions: tuple = ()
    conflict_cycle: list = field(default_factory=list)
    adjacency: str = FULL

    @property
    def greedy(self) -> bool:
        return self.status == GREEDY

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "adjacency": self.adjacency,
            "witness_word": [str(c) for c in self.witness_word],
            "witness_actions": [str(a) for a in self.witness_actions],
            "conflict_cycle": [c.letter() + f"@{c.send}" for c in self.conflict_cycle],
        }


def check_greedy(system: System, mode: str = FULL) -> GreedyVerdict:
    greedy_words = build_greedy_automaton(system)
    violations = build_violation_automaton(
        communication_alphabet(system), receive_alphabet(system), adjacency(system, mode)
    )
    word = find_accepting_word(intersect(greedy_words, violations))
    if word is None:
        return GreedyVerdict(GREEDY, adjacency=mode)
    actions = expand(word)
    cycle: list[Communication] = conflict_graph(system, actions).find_cycle() or []
    return GreedyVerdict(NOT_GREEDY, list(word), actions, cycle, mode)
