from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fifocheck.nfa import (
    EPSILON,
    AlphabetMismatch,
    Erased,
    Infinite,
    Nfa,
    erase_letters,
    find_accepting_path,
    find_accepting_word,
    finiteness_and_longest,
    intersect,
    prune,
)


def words(alphabet, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def language(a: Nfa, alphabet, max_len=4) -> set:
    return {w for w in words(alphabet, max_len) if a.accepts(w)}


def single(letter) -> Nfa:
    return Nfa(transitions=[(0, letter, 1)], initials=[0], finals=[1])


@st.composite
def small_nfas(draw, alphabet=("x", "y")):
    n = draw(st.integers(1, 4))
    states = list(range(n))
    letters = list(alphabet) + [EPSILON]
    transitions = draw(
        st.lists(st.tuples(st.sampled_from(states), st.sampled_from(letters), st.sampled_from(states)), max_size=8)
    )
    initials = draw(st.lists(st.sampled_from(states), min_size=1, max_size=2))
    finals = draw(st.lists(st.sampled_from(states), max_size=2))
    return Nfa(states, None, transitions, initials, finals)


class TestBasics:
    def test_accepts_with_epsilon(self):
        a = Nfa(transitions=[(0, EPSILON, 1), (1, "x", 2)], initials=[0], finals=[2])
        assert a.accepts(["x"])
        assert not a.accepts([])

    def test_lazy_counter(self):
        a = Nfa.lazy([0], lambda n: [("x", n + 1)] if n < 3 else [], lambda n: n == 3)
        assert a.accepts("xxx")
        assert not a.accepts("xx")
        assert len(a.states) == 4


class TestIntersect:
    def test_common_word(self):
        a = single("x")
        b = Nfa(transitions=[(0, "x", 1), (0, "y", 1)], initials=[0], finals=[1])
        assert language(intersect(a, b), "xy") == {("x",)}

    def test_universal_is_identity(self):
        a = Nfa(transitions=[(0, "x", 1), (1, "y", 0)], initials=[0], finals=[0])
        universal = Nfa(transitions=[(0, "x", 0), (0, "y", 0)], initials=[0], finals=[0])
        assert language(intersect(a, universal), "xy") == language(a, "xy")

    def test_alphabet_mismatch(self):
        with pytest.raises(AlphabetMismatch):
            intersect(Nfa(alphabet={"x"}), Nfa(alphabet={"y"}))

    @settings(max_examples=60, deadline=None)
    @given(small_nfas(), small_nfas())
    def test_language_is_intersection(self, a, b):
        both = language(intersect(a, b), "xy", 3)
        assert both == language(a, "xy", 3) & language(b, "xy", 3)


class TestFindAcceptingWord:
    def test_unreachable_final(self):
        a = Nfa(states=[0, 1], transitions=[], initials=[0], finals=[1])
        assert find_accepting_word(a) is None

    def test_single_transition(self):
        assert find_accepting_word(single("x")) == ["x"]

    def test_shortest(self):
        a = Nfa(transitions=[(0, "x", 1), (1, "x", 2), (0, "y", 2)], initials=[0], finals=[2])
        assert find_accepting_word(a) == ["y"]

    def test_silent_letters_are_free(self):
        a = Nfa(transitions=[(0, EPSILON, 1), (1, EPSILON, 2), (0, "x", 2)], initials=[0], finals=[2])
        assert find_accepting_word(a) == []
        assert find_accepting_path(a) == [EPSILON, EPSILON]

    @settings(max_examples=80, deadline=None)
    @given(small_nfas())
    def test_result_is_accepted(self, a):
        word = find_accepting_word(a)
        if word is None:
            assert language(a, "xy", 4) == set()
        else:
            assert a.accepts(word)


class TestPrune:
    def test_removes_dead_states(self):
        a = Nfa(transitions=[(0, "x", 1), (0, "y", 2), (3, "x", 1)], initials=[0], finals=[1])
        pruned = prune(a)
        assert pruned.states == {0, 1}
        assert language(pruned, "xy") == language(a, "xy")

    def test_empty_language(self):
        a = Nfa(transitions=[(0, "x", 1)], initials=[0], finals=[])
        assert prune(a).states == frozenset()

    @settings(max_examples=60, deadline=None)
    @given(small_nfas())
    def test_language_and_idempotence(self, a):
        once = prune(a)
        assert language(once, "xy", 4) == language(a, "xy", 4)
        assert prune(once).states == once.states


class TestErase:
    def test_keep_all(self):
        a = Nfa(transitions=[(0, "x", 1), (1, "y", 2)], initials=[0], finals=[2])
        assert language(erase_letters(a, lambda _: True), "xy") == {("x", "y")}

    def test_keep_none(self):
        a = Nfa(transitions=[(0, "x", 1), (1, "y", 2)], initials=[0], finals=[2])
        erased = erase_letters(a, lambda _: False)
        assert language(erased, "xy") == {()}
        path = find_accepting_path(erased)
        assert path == [Erased("x"), Erased("y")]

    def test_keep_none_on_empty_language(self):
        a = Nfa(transitions=[(0, "x", 1)], initials=[0], finals=[])
        assert language(erase_letters(a, lambda _: False), "xy") == set()

    def test_projection(self):
        a = Nfa(transitions=[(0, "x", 1), (1, "y", 0)], initials=[0], finals=[0])
        erased = erase_letters(a, lambda letter: letter == "x")
        assert language(erased, "xy", 3) == {(), ("x",), ("x", "x"), ("x", "x", "x")}


class TestFiniteness:
    def test_counted_self_loop(self):
        a = Nfa(transitions=[(0, "x", 0)], initials=[0], finals=[0])
        result = finiteness_and_longest(a, lambda letter: "x" if letter == "x" else None)
        assert isinstance(result, Infinite)
        assert result.cycle == ["x"]

    def test_chain(self):
        a = Nfa(transitions=[(0, "x", 1), (1, "x", 2), (2, "x", 3)], initials=[0], finals=[3])
        assert finiteness_and_longest(a, lambda letter: "x") == {"x": 3}

    def test_uncounted_cycle_is_allowed(self):
        a = Nfa(transitions=[(0, "y", 0), (0, "x", 1)], initials=[0], finals=[1])
        assert finiteness_and_longest(a, lambda letter: "x" if letter == "x" else None) == {"x": 1}

    def test_dead_cycle_is_pruned(self):
        a = Nfa(transitions=[(0, "x", 1), (0, "x", 2), (2, "x", 2)], initials=[0], finals=[1])
        assert finiteness_and_longest(a, lambda letter: "x") == {"x": 1}

    def test_classes(self):
        a = Nfa(transitions=[(0, "a", 1), (1, "b", 2), (2, "a", 3)], initials=[0], finals=[3])
        assert finiteness_and_longest(a, lambda letter: letter, ["a", "b", "c"]) == {"a": 2, "b": 1, "c": 0}

    def test_abc(self, abc):
        from fifocheck.greedy import UNMATCHED, build_greedy_prefix_automaton

        erased = erase_letters(build_greedy_prefix_automaton(abc), lambda c: c.kind == UNMATCHED)
        assert isinstance(finiteness_and_longest(erased, lambda c: c.buffer), Infinite)
