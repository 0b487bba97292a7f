import math

import numpy as np
import pytest

from twistlab.discretize import Grid2D
from twistlab.evolution import InitialData, evolve_and_record
from twistlab.geometry import CrossSection, TubeSpec, TwistProfile
from twistlab.spectral import mu_curve

# acceptance verdicts, printed once more in the terminal summary
ACCEPTANCE = {}

HEAT_L = 40.0
HEAT_T = 50.0
SNAPSHOTS = (0.0, 1.0, 3.0, 7.0)


@pytest.fixture(scope="session")
def square():
    return CrossSection.square()


@pytest.fixture(scope="session")
def square_grid(square):
    """The default cross-section resolution h' = pi/10 shared by the heavy tests."""
    return Grid2D.build(square, math.pi / 10)


@pytest.fixture(scope="session")
def heat_runs(square, square_grid):
    """Untwisted and twisted (beta=2) heat runs from the same datum on the same grids."""
    u0 = InitialData("gaussian", 6.0)
    runs = {}
    for name, twist in (("untwisted", TwistProfile.zero()), ("twisted", TwistProfile.bump(2.0))):
        tube = TubeSpec(square, twist, HEAT_L)
        runs[name] = evolve_and_record(tube, u0, HEAT_T, grid2=square_grid,
                                       snapshot_times=SNAPSHOTS)
    return runs


@pytest.fixture(scope="session")
def twisted_mu_hat(square, square_grid):
    """Self-similar threshold of the beta=2 square on the heat-run cross-section grid."""
    tube = TubeSpec(square, TwistProfile.bump(2.0), 20.0)
    return mu_curve(tube, np.arange(0.0, 8.5, 1.0), square_grid)


@pytest.fixture
def acceptance(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"AC{number:>2} {'PASS' if passed else 'FAIL'}: {detail}"
        ACCEPTANCE[number] = line
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
