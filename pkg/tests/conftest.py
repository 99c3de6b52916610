from __future__ import annotations

import json
from pathlib import Path

import pytest

from mds import parse_scenario

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

_criterion_lines: list[str] = []


def record_criterion(label: str, passed: bool, detail: str) -> None:
    """Collect one pass/fail line per acceptance criterion for the summary."""
    line = f"{'PASS' if passed else 'FAIL'}  criterion {label}: {detail}"
    _criterion_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)


def load_config(name: str) -> dict:
    with open(CONFIG_DIR / name, "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def demo_scn():
    return parse_scenario(load_config("demo.json"))


@pytest.fixture(scope="session")
def linear_scn():
    return parse_scenario(load_config("linear_steering.json"))


@pytest.fixture(scope="session")
def resolvent_scn():
    return parse_scenario(load_config("resolvent_check.json"))


@pytest.fixture(scope="session")
def demo_solution(demo_scn):
    from mds import picard_solve
    return picard_solve(demo_scn, None)


@pytest.fixture(scope="session")
def demo_steered(demo_scn):
    from mds import steer
    return steer(demo_scn)
