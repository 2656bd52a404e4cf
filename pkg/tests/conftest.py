from __future__ import annotations

import random
from fractions import Fraction

import pytest

# criterion number -> (title, passed)
ACCEPTANCE: dict = {}


def record(number: int, title: str, passed: bool):
    ACCEPTANCE[number] = (title, passed)
    print(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}")
    assert passed, f"criterion {number} failed: {title}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}")


@pytest.fixture
def rng():
    return random.Random(20261015)


def rand_frac(rng: random.Random, lo: int = -4, hi: int = 4, dens=(1, 2, 3)) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.choice(dens))
