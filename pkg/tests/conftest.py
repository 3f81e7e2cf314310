from __future__ import annotations

import sys

import pytest
from hypothesis import settings

from f2sketch.errors import CAPS

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _restore_caps():
    saved = dict(CAPS)
    yield
    CAPS.clear()
    CAPS.update(saved)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
