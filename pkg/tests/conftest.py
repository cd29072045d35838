import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from foamfab.calib import load_calibration, synthetic_table_path  # noqa: E402
from foamfab.geometry import FoamBlock, box_mesh, icosphere  # noqa: E402
from foamfab.plan import MachineParams  # noqa: E402

REPO = Path(__file__).resolve().parents[1]
UNIT_HEX_AREA = 1.5 * math.sqrt(3.0)  # side 1 mm


@pytest.fixture
def foam():
    return FoamBlock(60.0, 60.0, 50.0)


@pytest.fixture
def machine(foam):
    return MachineParams(foam=foam, inject_speed=1000.0)


@pytest.fixture(scope="session")
def demo_dir():
    return REPO / "demo"


@pytest.fixture(scope="session")
def synthetic_table():
    return load_calibration(synthetic_table_path())


@pytest.fixture(scope="session")
def box30():
    """30 x 30 x 50 mm box centred in the 60 x 60 x 50 foam."""
    return box_mesh((15, 15, 0), (45, 45, 50))


@pytest.fixture(scope="session")
def sphere10():
    """r = 10 mm icosphere (5120 triangles) centred in the foam."""
    return icosphere(10.0, 4, (30.0, 30.0, 25.0))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
