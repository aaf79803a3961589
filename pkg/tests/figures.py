"""Expected drawings of the fixture traces, and a reader for the DOT we emit."""

from __future__ import annotations

import re

import networkx as nx

# action graph of fig2.trace as drawn: vertices are labelled by action,
# repeated actions get a #k suffix
FIG2_ACTION_EDGES = [
    ("s!req", "c?res"),
    ("c?res", "s!ack_s"),
    ("s?req", "c!res"),
    ("c!res", "s?ack_s"),
    ("s?ack_s", "d!log_s"),
    ("s!req", "s?req"),
    ("c!res", "c?res"),
    ("s!ack_s", "s?ack_s"),
    ("s!ack_s", "d!log_c"),
    ("d!log_c", "c?ack_d"),
    ("d!log_c", "d?log_c"),
    ("d?log_c", "c!ack_d"),
    ("c!ack_d", "c?ack_d"),
    ("c!ack_d", "d?log_s"),
    ("d!log_c", "d!log_s"),
    ("c?ack_d", "s!req#2"),
    ("d!log_s", "d?log_s"),
]

# conflict graph of fig2.trace as drawn
FIG2_CONFLICT_EDGES = [
    ("ack_s", "log_c"),
    ("log_c", "ack_d"),
    ("log_c", "log_s"),
    ("req", "res"),
    ("ack_s", "log_s"),
    ("ack_d", "req_2"),
    ("res", "ack_s"),
]
FIG2_CONFLICT_VERTICES = ["req", "res", "ack_s", "log_c", "log_s", "ack_d", "req_2"]

FIG3_CONFLICT_EDGES = [("m1", "m2"), ("m2", "m1")]

_NODE = re.compile(r'^\s*(\w+) \[label="((?:[^"\\]|\\.)*)"')
_EDGE = re.compile(r"^\s*(\w+) -> (\w+)")


def expected_graph(edges, vertices=()) -> nx.DiGraph:
    g = nx.DiGraph()
    for v in vertices:
        g.add_node(v, label=v)
    for u, v in edges:
        g.add_node(u, label=u)
        g.add_node(v, label=v)
        g.add_edge(u, v)
    return g


def read_dot(text: str, number_repeats: bool = False) -> nx.DiGraph:
    """Graph of node labels read back from ``emit_dot`` output."""
    lines = text.splitlines()
    if not (lines[0].startswith("digraph") and lines[-1] == "}"):
        raise ValueError("not a digraph")
    labels: dict = {}
    seen: dict = {}
    for line in lines:
        match = _NODE.match(line)
        if match:
            label = match.group(2)
            seen[label] = seen.get(label, 0) + 1
            if number_repeats and seen[label] > 1:
                label = f"{label}#{seen[label]}"
            labels[match.group(1)] = label
    g = nx.DiGraph()
    for label in labels.values():
        g.add_node(label, label=label)
    for line in lines:
        match = _EDGE.match(line)
        if match:
            g.add_edge(labels[match.group(1)], labels[match.group(2)])
    return g


def isomorphic(a: nx.DiGraph, b: nx.DiGraph) -> bool:
    return nx.is_isomorphic(a, b, node_match=lambda x, y: x["label"] == y["label"])
