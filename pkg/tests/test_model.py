from __future__ import annotations

import pytest

from fifocheck.model import (
    BINARY,
    GENERAL,
    MAILBOX,
    P2P,
    Action,
    Configuration,
    EmptyBuffer,
    FifoAutomaton,
    HeadMismatch,
    NoSuchTransition,
    System,
    classify_topology,
    enabled,
    inbox,
    product,
    receive,
    run,
    send,
    step,
    validate_system,
)

from conftest import load


def chain(initial, *steps):
    """Automaton 0 -a1-> 1 -a2-> 2 ... from textual actions."""
    transitions = [(str(k), Action.parse(a), str(k + 1)) for k, a in enumerate(steps)]
    return FifoAutomaton.from_transitions(initial, transitions)


class TestAction:
    @pytest.mark.parametrize("text", ["s!req", "c?res", "p.q!m", "b1?a"])
    def test_parse_round_trip(self, text):
        assert str(Action.parse(text)) == text

    @pytest.mark.parametrize("text", ["", "s", "!m", "s!", "s!m?x"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            Action.parse(text)

    def test_kinds(self):
        assert send("s", "req").is_send and not send("s", "req").is_receive
        assert receive("s", "req").is_receive


class TestSystem:
    def test_csd_shape(self, csd):
        assert csd.names == ("c", "s", "d")
        assert csd.buffer_order == ("s", "c", "d")
        assert sum(len(aut.transitions) for aut in csd.automata.values()) == 12
        assert csd.process_of(send("s", "req")) == "c"
        assert csd.process_of(receive("d", "log_s")) == "d"

    def test_csd_is_valid(self, csd):
        assert validate_system(csd) == []

    def test_shared_action_is_reported(self):
        a = chain("0", "s!req")
        b = chain("0", "s!req")
        server = chain("0", "s?req")
        system = System.build([("c", a), ("d", b), ("s", server)])
        assert any("action sets not disjoint" in d for d in validate_system(system))

    def test_empty_system_is_valid(self):
        assert validate_system(System.build([])) == []

    def test_size_counts_states_and_transitions(self, ping):
        assert ping.size == 2 * (2 + 1)


class TestTopology:
    def test_csd_is_mailbox(self, csd):
        assert classify_topology(csd) == MAILBOX

    def test_two_processes_sending_to_each_other_is_binary(self, xchg):
        assert classify_topology(xchg) == BINARY

    def test_one_machine_with_private_buffers_is_general(self, abc):
        assert classify_topology(abc) == GENERAL

    def test_p2p(self):
        p = chain("0", "p.q!m", "p.r!m")
        q = chain("0", "p.q?m")
        r = chain("0", "p.r?m", "r.q!n")
        q2 = FifoAutomaton.from_transitions(
            "0", [("0", Action.parse("p.q?m"), "1"), ("1", Action.parse("r.q?n"), "2")]
        )
        assert classify_topology(System.build([("p", p), ("q", q2), ("r", r)])) == P2P
        assert classify_topology(System.build([("p", p), ("q", q), ("r", r)])) == P2P

    def test_inbox(self, csd):
        assert inbox(csd, "s") == ("s",)


class TestProduct:
    def test_csd_initial_move(self, csd):
        prod = product(csd)
        assert prod.initial == ("0", "0", "0")
        assert (send("s", "req"), ("1", "0", "0")) in prod.successors(prod.initial)

    def test_single_process_product_is_the_process(self, abc):
        prod = product(abc)
        assert len(prod.reachable_states()) == 3
        assert len(prod.transitions()) == 3

    def test_loops_add_up(self):
        a = FifoAutomaton.from_transitions("0", [("0", send("q", f"m{k}"), "0") for k in range(3)])
        b = FifoAutomaton.from_transitions("0", [("0", send("p", f"n{k}"), "0") for k in range(2)])
        prod = product(System.build([("p", a), ("q", b)]))
        assert prod.reachable_states() == {("0", "0")}
        assert len(prod.transitions()) == 5


class TestStep:
    def test_send_enqueues(self, csd):
        config = step(csd, csd.initial_configuration(), send("s", "req"))
        assert config.control == ("1", "0", "0")
        assert config.queue("s") == ("req",)
        assert config.queue("c") == config.queue("d") == ()

    def test_receive_from_empty_buffer(self, csd):
        with pytest.raises(EmptyBuffer):
            step(csd, csd.initial_configuration(), receive("s", "req"))

    def test_missing_transition(self, csd):
        with pytest.raises(NoSuchTransition):
            step(csd, csd.initial_configuration(), send("s", "ack_s"))

    def test_head_mismatch(self, csd):
        config = run(csd, [send("d", "log_c")])
        config = Configuration(("1", "3", "0"), config.buffers)
        with pytest.raises(HeadMismatch):
            step(csd, config, receive("d", "log_s"))

    def test_response_is_consumed(self, csd):
        config = run(csd, [send("s", "req"), receive("s", "req"), send("c", "res")])
        after = step(csd, config, receive("c", "res"))
        assert after.queue("c") == ()
        assert after.control[0] == "2"


class TestRun:
    def test_fig2_execution(self, csd, fig2):
        config = run(csd, fig2)
        # the second req is still pending; everything else was received
        assert config.control == ("1", "0", "0")
        assert config.occupancy() == {"s": 1, "c": 0, "d": 0}

    def test_empty_execution(self, csd):
        assert run(csd, []) == csd.initial_configuration()

    def test_error_index(self, csd):
        with pytest.raises(EmptyBuffer) as info:
            run(csd, [receive("s", "req")])
        assert info.value.index == 0

    def test_error_index_later(self, csd):
        with pytest.raises(NoSuchTransition) as info:
            run(csd, [send("s", "req"), send("s", "req")])
        assert info.value.index == 1


class TestEnabled:
    def test_csd_initial(self, csd):
        actions = {a for a, _ in enabled(csd, csd.initial_configuration())}
        assert actions == {send("s", "req"), send("d", "log_c")}

    def test_blocked(self):
        a = chain("0", "p?x")
        b = chain("0", "q?y")
        system = System.build([("p", a), ("q", b)])
        assert enabled(system, system.initial_configuration()) == []

    def test_xchg_both_sends(self, xchg):
        actions = {a for a, _ in enabled(xchg, xchg.initial_configuration())}
        assert actions == {send("q", "m2"), send("p", "m1")}


class TestConfiguration:
    def test_json_round_trip(self, csd, fig2):
        config = run(csd, fig2[:8])
        assert Configuration.from_json(config.to_json()) == config


def test_nondeterministic_run_keeps_all_branches():
    a = FifoAutomaton.from_transitions(
        "0", [("0", send("q", "m"), "1"), ("0", send("q", "m"), "2"), ("2", send("q", "n"), "3")]
    )
    b = FifoAutomaton.from_transitions("0", [("0", receive("q", "m"), "0")])
    system = System.build([("p", a), ("q", b)])
    assert run(system, [send("q", "m"), send("q", "n")]).control == ("3", "0")


def test_fixture_loader():
    assert load("ping").names == ("p", "q")
