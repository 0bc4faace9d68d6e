from pathlib import Path

import numpy as np
import pytest

from lcxplan import CableLayout, CableRow, CableSpec, Environment, Frequency, LinkBudgetParams

DATA = Path(__file__).resolve().parents[1] / "src" / "lcxplan" / "data"


def backends():
    names = ["python"]
    try:
        from lcxplan import _ckernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def f59():
    return Frequency.from_ghz(5.9)


@pytest.fixture
def flat_spec():
    """Single-row spec used wherever the frequency dependence does not matter."""
    rows = [CableRow(Frequency.from_ghz(g), 0.06, 60.0, 70.0) for g in (0.1, 0.9, 5.9)]
    return CableSpec("flat", tuple(rows), lc_tolerance=10.0)


@pytest.fixture
def straight_layout():
    return CableLayout(np.array([[0.0, 0.0], [15.0, 0.0]]))


@pytest.fixture
def rig():
    return LinkBudgetParams(transmit_power=18.0, loss_exponent=2.0, connector_loss=0.0,
                            receiver_gain_dbd=0.0)


@pytest.fixture
def field_env():
    # centres at integer y so d_lat = 1..32 fall on cell centres
    return Environment(grid_origin=(0.0, -0.5), grid_extent=(15.0, 34.0), grid_resolution=1.0)


# one line per acceptance criterion, collected by test_acceptance.report()
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
