from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from infoagg import Partition, make_space
from infoagg.experiments.example2 import die_infos, die_space


@pytest.fixture
def die():
    space, y = die_space()
    return space, y, die_infos()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def spaces_with_outcome(draw, min_n: int = 1, max_n: int = 12, allow_zero: bool = True):
    """A space with small-integer weights and an outcome variable on it."""
    n = draw(st.integers(min_n, max_n))
    lo = 0 if allow_zero else 1
    raw = draw(st.lists(st.integers(lo, 6), min_size=n, max_size=n).filter(lambda w: sum(w) > 0))
    space = make_space(raw)
    vals = draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n))
    return space, space.rv(np.array(vals) / 4)


@st.composite
def partitions(draw, n: int, max_blocks: int | None = None):
    k = max_blocks or n
    return Partition(draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
