"""Brute-force bounded exploration, used as ground truth in tests.

Nothing here relies on the automata constructions: executions are
enumerated one by one and conflict graphs are grown action by action.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .model import Configuration, FifoAutomaton, System, enabled, receive, send


@dataclass(frozen=True)
class ExplorationBudget:
    depth: int = 8
    buffer_bound: int | None = None
    max_nodes: int = 2_000_000

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.buffer_bound is not None and self.buffer_bound < 1:
            raise ValueError("buffer_bound must be positive")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be positive")


@dataclass
class Coverage:
    """How an exploration was cut short, if at all."""

    depth_cut: bool = False
    buffer_pruned: bool = False
    exhausted: bool = False

    @property
    def complete(self) -> bool:
        return not (self.depth_cut or self.buffer_pruned or self.exhausted)

    def to_json(self) -> dict:
        return {
            "depth_cut": self.depth_cut,
            "buffer_pruned": self.buffer_pruned,
            "budget_exhausted": self.exhausted,
        }


def _within_bound(config: Configuration, buffer_bound: int | None) -> bool:
    return buffer_bound is None or all(len(q) <= buffer_bound for _, q in config.buffers)


def _moves(system: System, config: Configuration, budget: ExplorationBudget, coverage: Coverage):
    for action, succ in enabled(system, config):
        if _within_bound(succ, budget.buffer_bound):
            yield action, succ
        else:
            coverage.buffer_pruned = True


class Enumeration:
    """Depth-first stream of executions; ``coverage`` is final once exhausted."""

    def __init__(self, system: System, budget: ExplorationBudget):
        self.system = system
        self.budget = budget
        self.coverage = Coverage()

    def __iter__(self) -> Iterator[tuple]:
        count = 0
        stack = [((), self.system.initial_configuration())]
        while stack:
            execution, config = stack.pop()
            count += 1
            if count > self.budget.max_nodes:
                self.coverage.exhausted = True
                return
            yield execution
            moves = list(_moves(self.system, config, self.budget, self.coverage))
            if len(execution) >= self.budget.depth:
                if moves:
                    self.coverage.depth_cut = True
                continue
            for action, succ in reversed(moves):
                stack.append((execution + (action,), succ))

    def to_list(self) -> list[tuple]:
        return list(self)


def enumerate_executions(system: System, budget: ExplorationBudget) -> Enumeration:
    return Enumeration(system, budget)


@dataclass
class OracleGreedy:
    greedy: bool
    counterexample: tuple | None
    coverage: Coverage
    explored: int = 0

    @property
    def qualified(self) -> bool:
        """A positive verdict only covers the explored executions."""
        return self.greedy and not self.coverage.complete


def _creates_cycle(edges: dict, source: int, targets: set) -> bool:
    """Whether ``source`` reaches one of ``targets``."""
    seen = {source}
    stack = [source]
    while stack:
        node = stack.pop()
        if node in targets:
            return True
        for nxt in edges.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def oracle_is_greedy_system(system: System, budget: ExplorationBudget) -> OracleGreedy:
    """Search for an execution whose conflict graph has a cycle.

    Communications are identified by the index of their send.  A send
    only adds incoming edges, so only a receive can close a cycle; once
    cyclic, every extension stays cyclic.
    """
    coverage = Coverage()
    owner = system.owners
    count = 0
    # (execution, config, comm id per index, per-buffer send indices, per-buffer receive count, edges)
    stack = [((), system.initial_configuration(), (), {}, {}, {})]
    while stack:
        execution, config, comm, sends, received, edges = stack.pop()
        count += 1
        if count > budget.max_nodes:
            coverage.exhausted = True
            break
        moves = list(_moves(system, config, budget, coverage))
        if len(execution) >= budget.depth:
            if moves:
                coverage.depth_cut = True
            continue
        for action, succ in reversed(moves):
            n = len(execution)
            who = owner[action]
            dependent = [
                j
                for j, a in enumerate(execution)
                if owner[a] == who or (a.kind == action.kind and a.buffer == action.buffer)
            ]
            new_sends, new_received = sends, received
            if action.is_send:
                me = n
                new_sends = dict(sends)
                new_sends[action.buffer] = sends.get(action.buffer, ()) + (n,)
            else:
                k = received.get(action.buffer, 0)
                me = sends[action.buffer][k]
                new_received = dict(received)
                new_received[action.buffer] = k + 1
            sources = {comm[j] for j in dependent} - {me}
            new_edges = {key: set(val) for key, val in edges.items()}
            for src in sources:
                new_edges.setdefault(src, set()).add(me)
            new_execution = execution + (action,)
            if action.is_receive and _creates_cycle(edges, me, sources):
                return OracleGreedy(False, new_execution, coverage, count)
            stack.append((new_execution, succ, comm + (me,), new_sends, new_received, new_edges))
    return OracleGreedy(True, None, coverage, count)


@dataclass
class Reachability:
    configurations: dict  # Configuration -> shortest execution reaching it
    coverage: Coverage

    def __contains__(self, config) -> bool:
        return config in self.configurations

    def __len__(self) -> int:
        return len(self.configurations)


def oracle_reachable(system: System, budget: ExplorationBudget) -> Reachability:
    """Configurations reachable within the budget, by breadth-first search."""
    coverage = Coverage()
    start = system.initial_configuration()
    reached = {start: ()}
    queue = deque([start])
    while queue:
        config = queue.popleft()
        path = reached[config]
        moves = list(_moves(system, config, budget, coverage))
        if len(path) >= budget.depth:
            if any(succ not in reached for _, succ in moves):
                coverage.depth_cut = True
            continue
        for action, succ in moves:
            if succ not in reached:
                if len(reached) >= budget.max_nodes:
                    coverage.exhausted = True
                    return Reachability(reached, coverage)
                reached[succ] = path + (action,)
                queue.append(succ)
    return Reachability(reached, coverage)


def oracle_max_occupancy(system: System, budget: ExplorationBudget) -> tuple[dict, Coverage]:
    result = oracle_reachable(system, budget)
    best = dict.fromkeys(system.buffer_order, 0)
    for config in result.configurations:
        for name, content in config.buffers:
            best[name] = max(best[name], len(content))
    return best, result.coverage


@dataclass
class RandomSystemSpec:
    processes: int = 3
    states: int = 4
    messages: int = 3
    topology: str = "mailbox"
    density: float = 1.5  # transitions per state, on average
    names: tuple = field(default=("p", "q", "r", "s", "t", "u"))


def random_system(seed: int, spec: RandomSystemSpec | None = None) -> System:
    """A seeded random system with deterministic automata and disjoint actions."""
    spec = spec or RandomSystemSpec()
    rng = random.Random(seed)
    n_proc = rng.randint(2, spec.processes)
    names = spec.names[:n_proc]
    messages = [f"m{k}" for k in range(rng.randint(1, spec.messages))]
    owned: dict = {}
    automata = []
    for name in names:
        n_states = rng.randint(1, spec.states)
        states = [str(k) for k in range(n_states)]
        target = max(1, round(spec.density * n_states * rng.uniform(0.5, 1.0)))
        transitions = []
        used = set()
        for _ in range(target * 4):
            if len(transitions) >= target:
                break
            src, dst = rng.choice(states), rng.choice(states)
            msg = rng.choice(messages)
            others = [q for q in names if q != name]
            if spec.topology == "mailbox":
                action = send(rng.choice(others), msg) if rng.random() < 0.5 else receive(name, msg)
            elif spec.topology == "p2p":
                peer = rng.choice(others)
                if rng.random() < 0.5:
                    action = send(f"{name}.{peer}", msg)
                else:
                    action = receive(f"{peer}.{name}", msg)
            else:
                raise ValueError(f"unsupported topology {spec.topology!r}")
            if owned.get(action, name) != name or (src, action) in used:
                continue
            owned[action] = name
            used.add((src, action))
            transitions.append((src, action, dst))
        automata.append((name, FifoAutomaton.from_transitions("0", transitions, states)))
    return System.build(automata)
