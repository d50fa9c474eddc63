from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, shown in the terminal summary
_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        print(line)
        _CRITERIA.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
