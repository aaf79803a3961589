"""A small non-deterministic finite automaton toolkit.

Automata are either explicit (states and transitions given up front) or
lazy (a successor function explored on demand).  Letters are arbitrary
hashable values.  :data:`EPSILON` and :class:`Erased` letters are silent.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable

import networkx as nx

from .model import FifoError


class _Epsilon:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ε"

    def __reduce__(self):
        return (_Epsilon, ())


EPSILON = _Epsilon()


@dataclass(frozen=True)
class Erased:
    """A silent letter that remembers which letter it replaced."""

    letter: Any

    def __str__(self) -> str:
        return f"ε[{self.letter}]"


def is_silent(letter) -> bool:
    return letter is EPSILON or isinstance(letter, Erased)


def letter_key(letter) -> tuple:
    if is_silent(letter):
        return (0, str(letter))
    return (1, str(letter), repr(letter))


class AlphabetMismatch(FifoError):
    pass


class Nfa:
    """Finite automaton with several initial states and ε-moves."""

    def __init__(
        self,
        states: Iterable[Hashable] = (),
        alphabet: Iterable[Hashable] | None = None,
        transitions: Iterable[tuple] = (),
        initials: Iterable[Hashable] = (),
        finals: Iterable[Hashable] = (),
    ):
        self._initials = tuple(sorted(set(initials), key=repr))
        self.alphabet = None if alphabet is None else frozenset(alphabet)
        outgoing: dict = defaultdict(list)
        declared = set(states) | set(self._initials)
        for src, letter, dst in transitions:
            outgoing[src].append((letter, dst))
            declared.update((src, dst))
        self._declared = frozenset(declared)
        self._final_set = frozenset(finals)
        self._explicit = {s: tuple(sorted(v, key=lambda t: (letter_key(t[0]), repr(t[1])))) for s, v in outgoing.items()}
        self._successor_fn: Callable | None = None
        self._final_fn: Callable | None = None
        self._cache: dict = {}
        self._letter_cache: dict = {}

    @classmethod
    def lazy(
        cls,
        initials: Iterable[Hashable],
        successors: Callable[[Hashable], Iterable[tuple]],
        is_final: Callable[[Hashable], bool],
        alphabet: Iterable[Hashable] | None = None,
    ) -> "Nfa":
        """An automaton whose transitions are computed on first visit."""
        nfa = cls(initials=initials, alphabet=alphabet)
        nfa._successor_fn = successors
        nfa._final_fn = is_final
        return nfa

    @property
    def is_lazy(self) -> bool:
        return self._successor_fn is not None

    @property
    def initials(self) -> tuple:
        return self._initials

    def successors(self, state) -> tuple:
        if self._successor_fn is None:
            return self._explicit.get(state, ())
        if state not in self._cache:
            moves = set(self._successor_fn(state))
            self._cache[state] = tuple(sorted(moves, key=lambda t: (letter_key(t[0]), repr(t[1]))))
        return self._cache[state]

    def successors_on(self, state, letter) -> tuple:
        key = state
        if key not in self._letter_cache:
            table: dict = defaultdict(list)
            for a, dst in self.successors(state):
                table[a].append(dst)
            self._letter_cache[key] = table
        return tuple(self._letter_cache[key].get(letter, ()))

    def is_final(self, state) -> bool:
        if self._final_fn is not None:
            return self._final_fn(state)
        return state in self._final_set

    def reachable(self) -> list:
        seen = dict.fromkeys(self._initials)
        queue = deque(self._initials)
        while queue:
            state = queue.popleft()
            for _, dst in self.successors(state):
                if dst not in seen:
                    seen[dst] = None
                    queue.append(dst)
        return list(seen)

    @property
    def states(self) -> frozenset:
        if self.is_lazy:
            return frozenset(self.reachable())
        return self._declared

    @property
    def transitions(self) -> frozenset:
        return frozenset((s, a, d) for s in self.states for a, d in self.successors(s))

    @property
    def finals(self) -> frozenset:
        return frozenset(s for s in self.states if self.is_final(s))

    def closure(self, states: Iterable) -> set:
        result = set(states)
        stack = list(result)
        while stack:
            state = stack.pop()
            for letter, dst in self.successors(state):
                if is_silent(letter) and dst not in result:
                    result.add(dst)
                    stack.append(dst)
        return result

    def read(self, states: Iterable, letter) -> set:
        current = self.closure(states)
        moved = {d for s in current for d in self.successors_on(s, letter)}
        return self.closure(moved)

    def accepts(self, word: Iterable) -> bool:
        current = self.closure(self._initials)
        for letter in word:
            current = self.read(current, letter)
            if not current:
                return False
        return any(self.is_final(s) for s in current)

    def __repr__(self) -> str:
        kind = "lazy" if self.is_lazy else f"{len(self._declared)} states"
        return f"<Nfa {kind}>"


def intersect(a: Nfa, b: Nfa) -> Nfa:
    """Lazy synchronous product; ε-moves interleave."""
    if a.alphabet is not None and b.alphabet is not None and a.alphabet != b.alphabet:
        raise AlphabetMismatch(
            f"alphabets differ: {sorted(map(str, a.alphabet ^ b.alphabet))[:8]}"
        )
    alphabet = a.alphabet if a.alphabet is not None else b.alphabet

    def successors(pair):
        p, q = pair
        for letter, p2 in a.successors(p):
            if is_silent(letter):
                yield letter, (p2, q)
            else:
                for q2 in b.successors_on(q, letter):
                    yield letter, (p2, q2)
        for letter, q2 in b.successors(q):
            if is_silent(letter):
                yield letter, (p, q2)

    initials = [(p, q) for p in a.initials for q in b.initials]
    return Nfa.lazy(initials, successors, lambda pair: a.is_final(pair[0]) and b.is_final(pair[1]), alphabet)


def find_accepting_path(a: Nfa) -> list | None:
    """Letters (silent ones included) of a run reaching a final state.

    The run has the fewest non-silent letters; ties are broken by the
    fixed letter order, so the result is reproducible.
    """
    dist: dict = {}
    parent: dict = {}
    queue: deque = deque()
    for state in a.initials:
        if state not in dist:
            dist[state] = 0
            parent[state] = None
            queue.append(state)
    done = set()
    while queue:
        state = queue.popleft()
        if state in done:
            continue
        done.add(state)
        if a.is_final(state):
            path = []
            while parent[state] is not None:
                state, letter = parent[state]
                path.append(letter)
            return path[::-1]
        for letter, dst in a.successors(state):
            cost = dist[state] + (0 if is_silent(letter) else 1)
            if dst not in dist or cost < dist[dst]:
                dist[dst] = cost
                parent[dst] = (state, letter)
                if is_silent(letter):
                    queue.appendleft(dst)
                else:
                    queue.append(dst)
    return None


def find_accepting_word(a: Nfa) -> list | None:
    path = find_accepting_path(a)
    if path is None:
        return None
    return [letter for letter in path if not is_silent(letter)]


def prune(a: Nfa) -> Nfa:
    """Keep only states reachable from an initial state and co-reachable to a final one."""
    reachable = a.reachable()
    edges = [(s, letter, d) for s in reachable for letter, d in a.successors(s)]
    backward: dict = defaultdict(list)
    for s, _, d in edges:
        backward[d].append(s)
    useful = {s for s in reachable if a.is_final(s)}
    stack = list(useful)
    while stack:
        state = stack.pop()
        for pred in backward[state]:
            if pred not in useful:
                useful.add(pred)
                stack.append(pred)
    return Nfa(
        states=useful,
        alphabet=a.alphabet,
        transitions=[(s, l, d) for s, l, d in edges if s in useful and d in useful],
        initials=[s for s in a.initials if s in useful],
        finals=[s for s in useful if a.is_final(s)],
    )


def erase_letters(a: Nfa, keep: Callable[[Any], bool]) -> Nfa:
    """Image under the morphism erasing every letter failing ``keep``."""

    def successors(state):
        for letter, dst in a.successors(state):
            if is_silent(letter) or keep(letter):
                yield letter, dst
            else:
                yield Erased(letter), dst

    alphabet = None if a.alphabet is None else frozenset(x for x in a.alphabet if keep(x))
    return Nfa.lazy(a.initials, successors, a.is_final, alphabet)


@dataclass
class Infinite:
    """A counted transition lies on a cycle: ``prefix`` then ``cycle`` forever."""

    prefix: list
    cycle: list
    letter_class: Any


def _bfs_path(a: Nfa, sources: Iterable, target, allowed: set | None = None) -> list:
    parent = {s: None for s in sources}
    queue = deque(parent)
    while queue:
        state = queue.popleft()
        if state == target:
            path = []
            while parent[state] is not None:
                state, letter = parent[state]
                path.append(letter)
            return path[::-1]
        for letter, dst in a.successors(state):
            if dst not in parent and (allowed is None or dst in allowed):
                parent[dst] = (state, letter)
                queue.append(dst)
    raise ValueError("target unreachable")


def finiteness_and_longest(a: Nfa, counted: Callable[[Any], Hashable | None], classes: Iterable = ()):
    """Decide whether counted letters can occur unboundedly often.

    ``counted`` maps a letter to its class (``None`` for uncounted, which
    covers silent letters).  Returns :class:`Infinite` with a pumpable
    witness, or a dict giving for each class the maximal number of
    counted letters of that class on a run from an initial state.
    """

    def klass(letter):
        return None if is_silent(letter) else counted(letter)

    pruned = prune(a)
    graph = nx.DiGraph()
    graph.add_nodes_from(pruned.states)
    edges = sorted(pruned.transitions, key=lambda t: (repr(t[0]), letter_key(t[1]), repr(t[2])))
    graph.add_edges_from((s, d) for s, _, d in edges)
    condensed = nx.condensation(graph)
    component = condensed.graph["mapping"]

    for s, letter, d in edges:
        cls = klass(letter)
        if cls is not None and component[s] == component[d]:
            members = condensed.nodes[component[s]]["members"]
            prefix = _bfs_path(pruned, pruned.initials, s)
            back = _bfs_path(pruned, [d], s, allowed=members)
            return Infinite(prefix, [letter, *back], cls)

    wanted = set(classes)
    for _, letter, _ in edges:
        cls = klass(letter)
        if cls is not None:
            wanted.add(cls)
    best: dict = {}
    out_edges: dict = defaultdict(list)
    for s, letter, d in edges:
        if component[s] != component[d]:
            out_edges[component[s]].append((klass(letter), component[d]))
    for node in reversed(list(nx.topological_sort(condensed))):
        row = dict.fromkeys(wanted, 0)
        for cls, target in out_edges[node]:
            for w in wanted:
                row[w] = max(row[w], best[target][w] + (cls == w))
        best[node] = row
    result = dict.fromkeys(wanted, 0)
    for state in pruned.initials:
        for w in wanted:
            result[w] = max(result[w], best[component[state]][w])
    return result
