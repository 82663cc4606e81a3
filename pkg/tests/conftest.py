import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

from treegroups.tree import TruncatedAutomorphism  # noqa: E402

import oracle  # noqa: E402


def from_oracle(g, d, n):
    return TruncatedAutomorphism.from_labels(d, n, oracle.bfs_labels(g, d, n))


@pytest.fixture
def to_ta():
    return from_oracle


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
