"""Acceptance scenarios, one test per criterion at its stated tolerance.

Each scenario records a PASS/FAIL line and the run ends with the whole table
(see conftest.py); failures carry the measured numbers.
"""
import pytest

from mdimlab import scenarios

LINES = []


@pytest.mark.parametrize("criterion", list(scenarios.CRITERIA), ids=lambda c: f"criterion_{c}")
def test_criterion(criterion):
    res = scenarios.run(criterion)
    LINES.append(res.line())
    assert res.passed, f"{res.line()} measured={res.measured}"
