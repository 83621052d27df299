import numpy as np
import pytest

from pidp import Params, validate_params
from pidp.errors import PidpError

# One line per acceptance criterion, replayed after the run while capture
# is off so the verdicts are visible in plain `pytest -v` output.
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit_params():
    return validate_params(Params(m1=1.0, m2=1.0, r1=1.0, r2=1.0, g=10.0))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_admissible(rng: np.random.Generator) -> Params:
    """Random admissible params from a box where the equilibrium residual
    of the drift stays below 1e-15 per component (masses in [0.8, 1.25],
    lengths in [1, 2], g in [1, 3])."""
    while True:
        p = Params(
            m1=float(rng.uniform(0.8, 1.25)),
            m2=float(rng.uniform(0.8, 1.25)),
            r1=float(rng.uniform(1.0, 2.0)),
            r2=float(rng.uniform(1.0, 2.0)),
            g=float(rng.uniform(1.0, 3.0)),
        )
        try:
            return validate_params(p)
        except PidpError:
            continue


def random_states(rng: np.random.Generator, n: int, omega_scale: float = 3.0) -> np.ndarray:
    thetas = rng.uniform(-np.pi, np.pi, size=(n, 2))
    omegas = rng.uniform(-omega_scale, omega_scale, size=(n, 2))
    return np.hstack([thetas, omegas])


@pytest.fixture(scope="session")
def oracle():
    from oracles import build

    return build()
