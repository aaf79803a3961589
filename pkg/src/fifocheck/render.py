"""Graphviz DOT output for action and conflict graphs.

Two ways of leaving out edges implied by transitivity:

``transitive``
    the transitive reduction;
``msc``
    message-sequence-chart style: every process keeps the edge to its next
    action and every matching pair keeps its message edge; other edges are
    kept only when the transitive reduction keeps them.
"""

from __future__ import annotations

from collections import Counter

import networkx as nx

from .causality import ActionGraph, ConflictGraph, matching_pairs

REDUCTIONS = ("none", "transitive", "msc")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _check_reduce(reduce: str) -> str:
    if reduce not in REDUCTIONS:
        raise ValueError(f"unknown reduction {reduce!r}; expected one of {REDUCTIONS}")
    return reduce


def action_graph_to_nx(graph: ActionGraph, reduce: str = "none") -> nx.DiGraph:
    _check_reduce(reduce)
    g = nx.DiGraph()
    for j, (action, owner) in enumerate(zip(graph.labels, graph.owners)):
        g.add_node(j, label=str(action), process=owner)
    g.add_edges_from(sorted(graph.edges))
    if reduce == "none":
        return g
    reduced = nx.transitive_reduction(g)
    reduced.add_nodes_from(g.nodes(data=True))
    if reduce == "msc":
        last: dict = {}
        for j, owner in enumerate(graph.owners):
            if owner in last:
                reduced.add_edge(last[owner], j)
            last[owner] = j
        reduced.add_edges_from(_message_edges(graph))
    return reduced


def _message_edges(graph: ActionGraph) -> list[tuple]:
    return [c.indices for c in matching_pairs(graph.labels) if c.matched]


def communication_names(graph: ConflictGraph) -> dict:
    """Name each communication by its message, ``req_2`` for the second ``req``."""
    seen: Counter = Counter()
    names = {}
    for comm in graph.vertices:
        seen[comm.message] += 1
        k = seen[comm.message]
        names[comm] = comm.message if k == 1 else f"{comm.message}_{k}"
    return names


def conflict_graph_to_nx(
    graph: ConflictGraph, reduce: str = "none", actions: ActionGraph | None = None
) -> nx.DiGraph:
    """Vertices are send indices.  ``msc`` needs the action graph: the
    result is the quotient of its ``msc`` rendering."""
    _check_reduce(reduce)
    names = communication_names(graph)
    g = nx.DiGraph()
    comm_of = {}
    for comm in graph.vertices:
        g.add_node(comm.send, label=names[comm], matched=comm.matched)
        for j in comm.indices:
            comm_of[j] = comm
    if reduce == "msc":
        if actions is None:
            raise ValueError("the msc rendering of a conflict graph needs the action graph")
        for u, v in action_graph_to_nx(actions, "msc").edges:
            c1, c2 = comm_of[u], comm_of[v]
            if c1 != c2:
                g.add_edge(c1.send, c2.send, kinds=",".join(sorted(graph.edges[c1, c2])))
        return g
    for (c1, c2), kinds in sorted(graph.edges.items()):
        g.add_edge(c1.send, c2.send, kinds=",".join(sorted(kinds)))
    if reduce == "transitive" and nx.is_directed_acyclic_graph(g):
        reduced = nx.transitive_reduction(g)
        reduced.add_nodes_from(g.nodes(data=True))
        reduced.add_edges_from((u, v, g.edges[u, v]) for u, v in reduced.edges)
        return reduced
    return g


def emit_dot(
    graph: ActionGraph | ConflictGraph,
    reduce: str = "none",
    name: str = "G",
    actions: ActionGraph | None = None,
) -> str:
    """DOT text; action graphs get one cluster per process.

    Cyclic conflict graphs are never transitively reduced.
    """
    lines = [f"digraph {_quote(name)} {{", "  node [shape=ellipse];"]
    if isinstance(graph, ActionGraph):
        g = action_graph_to_nx(graph, reduce)
        processes = list(dict.fromkeys(graph.owners))
        for k, process in enumerate(processes):
            lines.append(f"  subgraph cluster_{k} {{")
            lines.append(f"    label={_quote(process)};")
            for j in sorted(g.nodes):
                if g.nodes[j]["process"] == process:
                    lines.append(f"    n{j} [label={_quote(g.nodes[j]['label'])}];")
            lines.append("  }")
        for u, v in sorted(g.edges):
            lines.append(f"  n{u} -> n{v};")
    else:
        g = conflict_graph_to_nx(graph, reduce, actions)
        for j in sorted(g.nodes):
            style = "" if g.nodes[j]["matched"] else ", style=dashed"
            lines.append(f"  c{j} [label={_quote(g.nodes[j]['label'])}{style}];")
        for u, v in sorted(g.edges):
            lines.append(f"  c{u} -> c{v} [label={_quote(g.edges[u, v]['kinds'])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
