import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from gaussopt.lie import sample_group  # noqa: E402
from gaussopt.purification import standard_mixed_J  # noqa: E402

settings.register_profile(
    "default",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def random_state_J(kind, N, seed, mixed=False, spread=0.5):
    """J = M (+)c_i A2 M^-1 with M a random group element."""
    rng = np.random.default_rng(seed)
    if not mixed:
        c = np.ones(N)
    elif kind == "boson":
        c = 1.0 + rng.exponential(1.0, size=N)
    else:
        c = rng.uniform(0.05, 0.95, size=N) * rng.choice([-1, 1], size=N)
    M = sample_group(kind, N, seed, spread)
    return M @ standard_mixed_J(c) @ np.linalg.inv(M)


@pytest.fixture(scope="session")
def kg100():
    from gaussopt.applications import klein_gordon_chain

    return klein_gordon_chain(100, 0.1)[1].J


@pytest.fixture(scope="session")
def ising100():
    from gaussopt.applications import ising_chain

    return ising_chain(100, 1.0, 1.0)[1].J
