from __future__ import annotations

from pathlib import Path

import pytest

from fifocheck.dsl import load_system, parse_trace

SYSTEMS = Path(__file__).resolve().parent.parent / "systems"
GOLDEN = Path(__file__).resolve().parent / "golden"


def system_path(name: str) -> Path:
    return SYSTEMS / f"{name}.fifo"


def load(name: str):
    return load_system(system_path(name))


def trace(system, name: str) -> tuple:
    return parse_trace(system, (SYSTEMS / f"{name}.trace").read_text())


@pytest.fixture(scope="session")
def csd():
    return load("csd")


@pytest.fixture(scope="session")
def xchg():
    return load("xchg")


@pytest.fixture(scope="session")
def csb():
    return load("csb")


@pytest.fixture(scope="session")
def abc():
    return load("abc")


@pytest.fixture(scope="session")
def ping():
    return load("ping")


@pytest.fixture(scope="session")
def fig2(csd):
    return trace(csd, "fig2")


@pytest.fixture(scope="session")
def fig3(xchg):
    return trace(xchg, "fig3")
