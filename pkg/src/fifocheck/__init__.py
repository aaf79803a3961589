"""Verification of systems of communicating FIFO automata.

The central question is whether a system is greedy: whether every
execution can be reordered, without changing its causal structure, so
that each receive immediately follows its send.  Greedy systems admit
decision procedures for regular safety properties and boundedness.
"""

from .causality import (
    ActionGraph,
    Communication,
    ConflictGraph,
    CyclicConflictGraph,
    action_graph,
    causally_equivalent,
    conflict_graph,
    is_greedy_execution,
    matching_pairs,
    reschedule_greedy,
)
from .dsl import ParseError, TopologyMismatch, load_system, parse_system, parse_trace, print_system
from .greedy import GreedyVerdict, check_greedy
from .halfduplex import (
    HalfDuplexVerdict,
    check_binary_half_duplex,
    check_mailbox_half_duplex_bounded,
    check_no_orphan_bounded,
    is_half_duplex_execution,
)
from .model import Action, Configuration, FifoAutomaton, FifoError, System, classify_topology, receive, run, send
from .oracle import ExplorationBudget, enumerate_executions, oracle_is_greedy_system, oracle_reachable
from .render import emit_dot
from .safety import (
    NotGreedySystem,
    build_property_progress,
    build_property_reach_config,
    build_property_reach_control,
    build_property_unspecified_reception,
    check_boundedness,
    check_safety,
)

__version__ = "0.1.0"
