"""Happens-before structure of executions.

Indices are 0-based positions in the execution.  A communication is either
a matching pair (k-th send and k-th receive on one buffer) or a lone send
that is never received.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .model import Action, FifoError, System

SS, SR, RS, RR = "SS", "SR", "RS", "RR"


class MalformedExecution(FifoError):
    pass


class CyclicConflictGraph(FifoError):
    def __init__(self, cycle: list["Communication"]):
        super().__init__("conflict graph has a cycle: " + " -> ".join(map(str, cycle)))
        self.cycle = cycle


@dataclass(frozen=True, order=True)
class Communication:
    send: int
    receive: int | None
    buffer: str = field(compare=False)
    message: str = field(compare=False)

    @property
    def indices(self) -> tuple:
        return (self.send,) if self.receive is None else (self.send, self.receive)

    @property
    def matched(self) -> bool:
        return self.receive is not None

    def letter(self) -> str:
        op = "!?" if self.matched else "!"
        return f"{self.buffer}{op}{self.message}"

    def __str__(self) -> str:
        return f"{self.letter()}@{self.send}"


def matching_pairs(execution: Sequence[Action]) -> list[Communication]:
    """Partition the indices of ``execution`` into communications, by send index."""
    sends: dict[str, list[int]] = defaultdict(list)
    received: dict[str, int] = defaultdict(int)
    partner: dict[int, int] = {}
    for j, action in enumerate(execution):
        if action.is_send:
            sends[action.buffer].append(j)
            continue
        k = received[action.buffer]
        queue = sends[action.buffer]
        if k >= len(queue):
            raise MalformedExecution(f"receive {action} at {j} has no matching send")
        s = queue[k]
        if execution[s].message != action.message:
            raise MalformedExecution(f"receive {action} at {j} does not match send {execution[s]} at {s}")
        partner[s] = j
        received[action.buffer] = k + 1
    return [
        Communication(j, partner.get(j), a.buffer, a.message)
        for j, a in enumerate(execution)
        if a.is_send
    ]


def commutes(system: System, a1: Action, a2: Action) -> bool:
    if system.process_of(a1) == system.process_of(a2):
        return False
    return not (a1.kind == a2.kind and a1.buffer == a2.buffer)


@dataclass
class ActionGraph:
    labels: tuple  # Action per vertex
    owners: tuple  # process per vertex
    edges: frozenset  # (j, j2) with j < j2

    def successors(self, j: int) -> list[int]:
        return sorted(b for a, b in self.edges if a == j)

    def predecessors(self, j: int) -> list[int]:
        return sorted(a for a, b in self.edges if b == j)


def action_graph(system: System, execution: Sequence[Action]) -> ActionGraph:
    execution = tuple(execution)
    owners = tuple(system.process_of(a) for a in execution)
    partner = {}
    for comm in matching_pairs(execution):
        if comm.matched:
            partner[comm.send] = comm.receive
    edges = set()
    for j, a in enumerate(execution):
        for j2 in range(j + 1, len(execution)):
            b = execution[j2]
            dependent = owners[j] == owners[j2] or (a.kind == b.kind and a.buffer == b.buffer)
            if dependent or partner.get(j) == j2:
                edges.add((j, j2))
    return ActionGraph(execution, owners, frozenset(edges))


@dataclass
class ConflictGraph:
    vertices: list  # Communication, sorted by send index
    edges: dict  # (Communication, Communication) -> frozenset of kinds

    def successors(self, comm: Communication) -> list[Communication]:
        return sorted(d for (s, d) in self.edges if s == comm)

    def find_cycle(self) -> list[Communication] | None:
        adjacency: dict = defaultdict(list)
        for s, d in sorted(self.edges):
            adjacency[s].append(d)
        colour: dict = {}
        for root in self.vertices:
            if root in colour:
                continue
            path = [root]
            colour[root] = 1
            stack = [iter(adjacency[root])]
            while stack:
                for nxt in stack[-1]:
                    if colour.get(nxt) == 1:
                        return path[path.index(nxt):]
                    if nxt not in colour:
                        colour[nxt] = 1
                        path.append(nxt)
                        stack.append(iter(adjacency[nxt]))
                        break
                else:
                    colour[path.pop()] = 2
                    stack.pop()
        return None

    def is_acyclic(self) -> bool:
        return self.find_cycle() is None


def _kind(action: Action) -> str:
    return "S" if action.is_send else "R"


def conflict_graph(system: System, execution: Sequence[Action]) -> ConflictGraph:
    """Quotient of the action graph by communications.

    Edges inside a single communication (a send before its own receive)
    are not recorded.
    """
    execution = tuple(execution)
    comms = matching_pairs(execution)
    comm_of = {}
    for comm in comms:
        for j in comm.indices:
            comm_of[j] = comm
    edges: dict = defaultdict(set)
    for j, j2 in action_graph(system, execution).edges:
        c1, c2 = comm_of[j], comm_of[j2]
        if c1 != c2:
            edges[c1, c2].add(_kind(execution[j]) + _kind(execution[j2]))
    return ConflictGraph(comms, {k: frozenset(v) for k, v in edges.items()})


def is_greedy_execution(execution: Sequence[Action]) -> bool:
    return all(c.receive == c.send + 1 for c in matching_pairs(execution) if c.matched)


def reschedule_greedy(system: System, execution: Sequence[Action]) -> tuple:
    """Reorder ``execution`` into a causally equivalent greedy execution.

    Communications are laid out in a topological order of the conflict
    graph (Kahn, smallest send index first).
    """
    execution = tuple(execution)
    graph = conflict_graph(system, execution)
    indegree = {c: 0 for c in graph.vertices}
    adjacency: dict = defaultdict(list)
    for s, d in graph.edges:
        indegree[d] += 1
        adjacency[s].append(d)
    ready = [c for c, deg in indegree.items() if deg == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        comm = heapq.heappop(ready)
        order.append(comm)
        for nxt in adjacency[comm]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(graph.vertices):
        raise CyclicConflictGraph(graph.find_cycle())
    return tuple(execution[j] for comm in order for j in comm.indices)


def _positions(system: System, execution: Sequence[Action]) -> tuple[dict, dict]:
    """Map (process, k) to index, and per-process action sequences."""
    position = {}
    sequences: dict = defaultdict(list)
    for j, action in enumerate(execution):
        owner = system.process_of(action)
        position[owner, len(sequences[owner])] = j
        sequences[owner].append(action)
    return position, sequences


def causally_equivalent(system: System, e1: Sequence[Action], e2: Sequence[Action]) -> bool:
    """Isomorphism of action graphs under the per-process index bijection."""
    e1, e2 = tuple(e1), tuple(e2)
    if len(e1) != len(e2):
        return False
    pos1, seq1 = _positions(system, e1)
    pos2, seq2 = _positions(system, e2)
    if seq1 != seq2:
        return False
    to2 = {pos1[key]: pos2[key] for key in pos1}
    to1 = {v: k for k, v in to2.items()}
    g1, g2 = action_graph(system, e1), action_graph(system, e2)
    return all(to2[a] < to2[b] for a, b in g1.edges) and all(to1[a] < to1[b] for a, b in g2.edges)
