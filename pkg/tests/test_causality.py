from __future__ import annotations

import pytest

from fifocheck.causality import (
    RR,
    RS,
    SR,
    SS,
    CyclicConflictGraph,
    MalformedExecution,
    action_graph,
    causally_equivalent,
    commutes,
    conflict_graph,
    is_greedy_execution,
    matching_pairs,
    reschedule_greedy,
)
from fifocheck.model import Action, FifoAutomaton, System, receive, run, send


def actions(text: str) -> tuple:
    return tuple(Action.parse(t) for t in text.split())


# a greedy execution equivalent to the fig2.trace execution
E_PRIME = actions(
    "s!req s?req c!res c?res s!ack_s s?ack_s d!log_c d?log_c c!ack_d c?ack_d s!req d!log_s d?log_s"
)


class TestMatchingPairs:
    def test_fig2(self, fig2):
        comms = matching_pairs(fig2)
        assert len(comms) == 7
        assert sum(c.matched for c in comms) == 6
        unmatched = [c for c in comms if not c.matched]
        assert [(c.send, c.message) for c in unmatched] == [(11, "req")]

    def test_single_send(self):
        (comm,) = matching_pairs(actions("i!m"))
        assert comm.receive is None

    def test_kth_send_matches_kth_receive(self):
        comms = matching_pairs(actions("i!m i!m i?m"))
        assert [(c.send, c.receive) for c in comms] == [(0, 2), (1, None)]

    def test_receive_without_send(self):
        with pytest.raises(MalformedExecution):
            matching_pairs(actions("i?m"))

    def test_message_mismatch(self):
        with pytest.raises(MalformedExecution):
            matching_pairs(actions("i!m i?n"))


class TestCommutes:
    def test_independent_processes(self, csd):
        assert commutes(csd, send("s", "req"), send("d", "log_s"))

    def test_same_kind_same_buffer(self, csd):
        assert not commutes(csd, send("d", "log_c"), send("d", "log_s"))

    def test_same_action(self, csd):
        assert not commutes(csd, send("s", "req"), send("s", "req"))

    def test_send_and_receive_on_one_buffer_commute(self, csd):
        # different processes, different kinds
        assert commutes(csd, send("d", "log_s"), receive("d", "log_c"))


class TestActionGraph:
    def test_fig2_edges(self, csd, fig2):
        graph = action_graph(csd, fig2)
        assert len(graph.labels) == 13
        assert (6, 7) in graph.edges  # d!log_c before d!log_s: same buffer and kind
        assert (7, 12) in graph.edges  # matching pair of log_s
        assert (3, 7) not in graph.edges  # client and server actions on different buffers

    def test_single_vertex(self, csd):
        graph = action_graph(csd, actions("s!req"))
        assert graph.edges == frozenset()

    def test_independent_processes(self):
        p = FifoAutomaton.from_transitions("0", [("0", send("a", "x"), "1")])
        q = FifoAutomaton.from_transitions("0", [("0", receive("a", "x"), "1")])
        r = FifoAutomaton.from_transitions("0", [("0", send("b", "y"), "1")])
        s = FifoAutomaton.from_transitions("0", [("0", receive("b", "y"), "1")])
        system = System.build([("p", p), ("q", q), ("r", r), ("s", s)])
        graph = action_graph(system, actions("a!x b!y a?x b?y"))
        # only the two message edges remain
        assert graph.edges == {(0, 2), (1, 3)}

    def test_edges_go_forward(self, csd, fig2):
        assert all(a < b for a, b in action_graph(csd, fig2).edges)


class TestConflictGraph:
    def test_fig2(self, csd, fig2):
        graph = conflict_graph(csd, fig2)
        by_send = {c.send: c for c in graph.vertices}
        req, res, ack_s, log_c, log_s, ack_d, req2 = (by_send[j] for j in (0, 2, 4, 6, 7, 9, 11))
        # chain drawn in the figure
        for edge in [(req, res), (res, ack_s), (ack_s, log_c), (log_c, ack_d), (ack_d, req2), (ack_s, log_s), (log_c, log_s)]:
            assert edge in graph.edges
        # the database sends ack_d before it receives log_s
        assert graph.edges[ack_d, log_s] == {SR}
        assert graph.is_acyclic()

    def test_fig3_two_cycle(self, xchg, fig3):
        graph = conflict_graph(xchg, fig3)
        m1, m2 = graph.vertices
        assert set(graph.edges) == {(m1, m2), (m2, m1)}
        assert graph.edges[m1, m2] == {SR} and graph.edges[m2, m1] == {SR}
        assert set(graph.find_cycle()) == {m1, m2}

    def test_independent_pairs_have_no_edges(self):
        p = FifoAutomaton.from_transitions("0", [("0", send("a", "x"), "1")])
        q = FifoAutomaton.from_transitions("0", [("0", receive("a", "x"), "1")])
        r = FifoAutomaton.from_transitions("0", [("0", send("b", "y"), "1")])
        s = FifoAutomaton.from_transitions("0", [("0", receive("b", "y"), "1")])
        system = System.build([("p", p), ("q", q), ("r", r), ("s", s)])
        assert conflict_graph(system, actions("a!x a?x b!y b?y")).edges == {}

    def test_kinds(self, csd):
        graph = conflict_graph(csd, actions("s!req s?req c!res c?res"))
        req, res = graph.vertices
        assert graph.edges[req, res] == {RS, SR}
        assert not {SS, RR} & graph.edges[req, res]


class TestGreedyExecution:
    def test_greedy(self):
        assert is_greedy_execution(actions("s!req s?req c!res c?res s!ack_s d!log_c d?log_c"))

    def test_not_greedy(self):
        assert not is_greedy_execution(actions("s!req s?req c!res c?res s!ack_s d!log_c s?ack_s"))

    def test_empty(self):
        assert is_greedy_execution(())


class TestReschedule:
    def test_fig2(self, csd, fig2):
        greedy = reschedule_greedy(csd, fig2)
        assert is_greedy_execution(greedy)
        assert causally_equivalent(csd, greedy, fig2)
        assert run(csd, greedy) == run(csd, fig2)

    def test_already_greedy(self, csd):
        assert reschedule_greedy(csd, E_PRIME) == E_PRIME

    def test_fig3_has_a_cycle(self, xchg, fig3):
        with pytest.raises(CyclicConflictGraph) as info:
            reschedule_greedy(xchg, fig3)
        assert {c.message for c in info.value.cycle} == {"m1", "m2"}


class TestCausalEquivalence:
    def test_fig2_and_its_greedy_form(self, csd, fig2):
        assert causally_equivalent(csd, fig2, E_PRIME)

    def test_reflexive(self, csd, fig2):
        assert causally_equivalent(csd, fig2, fig2)

    def test_fig3_has_no_greedy_equivalent(self, xchg, fig3):
        for other in [actions("q!m2 q?m2 p!m1 p?m1"), actions("p!m1 p?m1 q!m2 q?m2")]:
            assert not causally_equivalent(xchg, fig3, other)

    def test_swapping_dependent_actions_breaks_equivalence(self, csd):
        e1 = actions("s!req d!log_c")
        assert causally_equivalent(csd, e1, actions("d!log_c s!req")) is False  # same process

    def test_swapping_independent_actions_keeps_equivalence(self, csd, fig2):
        swapped = fig2[:7] + (fig2[8], fig2[7]) + fig2[9:]
        assert causally_equivalent(csd, fig2, swapped)
