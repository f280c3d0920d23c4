import numpy as np
import pytest

from olm_stokes.experiments import box_mesh_pair, manufactured_solution, rotated_mesh_pair
from olm_stokes.geometry import build_cut_geometry
from olm_stokes.mesh import build_structured_square_mesh


@pytest.fixture
def unit_square_2x2():
    return build_structured_square_mesh((0, 0), (1, 1), 2, 2)


@pytest.fixture
def inner_box_1x1():
    return build_structured_square_mesh((0.25, 0.25), (0.75, 0.75), 1, 1)


@pytest.fixture
def box_geometry(unit_square_2x2, inner_box_1x1):
    return build_cut_geometry(unit_square_2x2, inner_box_1x1)


@pytest.fixture(params=[0.0, 0.35, np.pi / 7], ids=["angle0", "angle0.35", "angle_pi7"])
def rotated_pair(request):
    return rotated_mesh_pair(1, request.param)


@pytest.fixture
def coarse_box_pair():
    return box_mesh_pair(5, 3, 0.21)


@pytest.fixture
def patch_solution():
    return manufactured_solution("patch")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
