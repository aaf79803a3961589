"""The ``.fifo`` system description language and the trace format.

::

    system csd
    topology mailbox
    process client {
      initial 0
      0 -> 1 : s!req     # src -> dst : buffer op message
      1 -> 0 : c?res
    }

Two optional extensions: ``buffers b1 b2 ...`` after the header fixes the
buffer order, and ``states s1 s2 ...`` inside a process declares its
states (transitions must then only use declared states).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .model import (
    RECEIVE,
    SEND,
    Action,
    FifoAutomaton,
    FifoError,
    System,
    classify_topology,
    validate_system,
)

TOPOLOGIES = ("mailbox", "p2p", "binary", "general")

# declared topology -> classifications compatible with it
_COMPATIBLE = {
    "binary": {"binary"},
    "mailbox": {"binary", "mailbox"},
    "p2p": {"binary", "p2p"},
    "general": {"binary", "mailbox", "p2p", "general"},
}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<arrow>->)|(?P<punct>[{}:!?])|(?P<ident>[A-Za-z0-9_][A-Za-z0-9_.]*)"
)
KEYWORDS = {"system", "topology", "process", "initial", "buffers", "states"}


class ParseError(FifoError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TopologyMismatch(FifoError):
    pass


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        if kind == "nl":
            line += 1
            line_start = match.end()
        elif kind not in ("ws", "comment"):
            tokens.append(_Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def fail(self, message: str, token: _Token | None = None):
        token = token or self.peek()
        raise ParseError(message, token.line, token.column)

    def expect(self, text: str) -> _Token:
        token = self.peek()
        if token.text != text:
            self.fail(f"expected {text!r}, found {token.text or 'end of file'!r}")
        self.pos += 1
        return token

    def ident(self, what: str) -> _Token:
        token = self.peek()
        if token.kind != "ident" or token.text in KEYWORDS:
            self.fail(f"expected {what}, found {token.text or 'end of file'!r}")
        self.pos += 1
        return token

    def idents(self) -> list[str]:
        names = []
        while self.peek().kind == "ident" and self.peek().text not in KEYWORDS:
            names.append(self.ident("name").text)
        return names

    def system(self):
        self.expect("system")
        name = self.ident("system name").text
        topology = None
        buffers = None
        if self.peek().text == "topology":
            self.pos += 1
            token = self.ident("topology")
            if token.text not in TOPOLOGIES:
                self.fail(f"unknown topology {token.text!r}", token)
            topology = token.text
        if self.peek().text == "buffers":
            self.pos += 1
            buffers = self.idents()
        processes = []
        while self.peek().text == "process":
            processes.append(self.process())
        if self.peek().kind != "eof":
            self.fail(f"expected 'process', found {self.peek().text!r}")
        if not processes:
            self.fail("a system needs at least one process")
        return name, topology, buffers, processes

    def process(self):
        self.expect("process")
        name_token = self.ident("process name")
        self.expect("{")
        declared = None
        if self.peek().text == "states":
            self.pos += 1
            declared = self.idents()
        self.expect("initial")
        initial = self.ident("initial state")
        transitions = []
        while self.peek().kind == "ident" and self.peek().text not in KEYWORDS:
            src = self.ident("state")
            self.expect("->")
            dst = self.ident("state")
            self.expect(":")
            buffer = self.ident("buffer")
            op = self.peek()
            if op.text not in (SEND, RECEIVE):
                self.fail("expected '!' or '?'")
            self.pos += 1
            message = self.ident("message")
            transitions.append((src, Action(buffer.text, op.text, message.text), dst))
            if declared is not None:
                for token in (src, dst):
                    if token.text not in declared:
                        self.fail(f"undeclared state {token.text!r} in process {name_token.text}", token)
        if declared is not None and initial.text not in declared:
            self.fail(f"undeclared state {initial.text!r} in process {name_token.text}", initial)
        self.expect("}")
        aut = FifoAutomaton.from_transitions(
            initial.text, [(s.text, a, d.text) for s, a, d in transitions], declared or ()
        )
        return name_token, aut


@dataclass
class SystemSource:
    name: str
    system: System
    topology: str | None = None


def parse_source(text: str) -> SystemSource:
    name, topology, buffers, processes = _Parser(text).system()
    seen = set()
    for token, _ in processes:
        if token.text in seen:
            raise ParseError(f"duplicate process {token.text!r}", token.line, token.column)
        seen.add(token.text)
    system = System.build([(t.text, aut) for t, aut in processes], buffers)
    problems = validate_system(system)
    if problems:
        raise FifoError("; ".join(problems))
    if topology is not None:
        actual = classify_topology(system)
        if actual not in _COMPATIBLE[topology]:
            raise TopologyMismatch(f"declared topology {topology} but the system is {actual}")
    return SystemSource(name, system, topology)


def parse_system(text: str) -> System:
    return parse_source(text).system


def load_system(path: str | Path) -> System:
    return parse_system(Path(path).read_text(encoding="utf-8"))


def print_system(system: System, name: str = "system", topology: str | None = None) -> str:
    lines = [f"system {name}"]
    if topology:
        lines.append(f"topology {topology}")
    if system.buffer_order:
        lines.append("buffers " + " ".join(system.buffer_order))
    for pname, aut in system.processes:
        lines.append(f"process {pname} {{")
        lines.append("  states " + " ".join(sorted(aut.states)))
        lines.append(f"  initial {aut.initial}")
        for src, action, dst in aut.transitions:
            lines.append(f"  {src} -> {dst} : {action}")
        lines.append("}")
    return "\n".join(lines) + "\n"


def parse_trace(system: System, text: str) -> tuple:
    """Whitespace separated ``process:buffer!msg`` (or ``buffer?msg``) tokens."""
    actions = []
    for line_no, line in enumerate(text.splitlines(), 1):
        for token in line.split("#", 1)[0].split():
            owner, _, body = token.rpartition(":")
            try:
                action = Action.parse(body)
            except ValueError as exc:
                raise ParseError(str(exc), line_no, line.index(token) + 1) from None
            if action not in system.owners:
                raise ParseError(f"no process performs {action}", line_no, line.index(token) + 1)
            if owner and system.owners[action] != owner:
                raise ParseError(
                    f"{action} belongs to {system.owners[action]}, not {owner}",
                    line_no,
                    line.index(token) + 1,
                )
            actions.append(action)
    return tuple(actions)


def print_trace(system: System, execution) -> str:
    return " ".join(f"{system.process_of(a)}:{a}" for a in execution)
