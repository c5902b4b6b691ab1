import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pamt.synthetic import planted_bundle  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
DATA_DIR = Path(os.environ.get("PAMT_DATA_DIR", Path(__file__).parent.parent / "data"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def planted():
    return planted_bundle(n=400, c=4, d=200, noise_rate=0.25, seed=7)


@pytest.fixture(scope="session")
def noisy_planted():
    """Mostly cross-class edges, so unmasked propagation is badly polluted."""
    return planted_bundle(n=500, c=4, d=300, noise_rate=0.55, signal=0.5, seed=11)


def pytest_terminal_summary(terminalreporter):
    from report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
