import numpy as np
import pytest

from simgrasp.geometry import RigidTransform, SceneDescription, SceneObject
from simgrasp.gripper import GripperModel
from simgrasp.primitives import box_mesh, write_desk_scene

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def place(mesh, xyz=(0.0, 0.0, 0.0), instance_id=0, rotation=None):
    R = np.eye(3) if rotation is None else rotation
    return SceneObject(mesh, RigidTransform(R, xyz), 1.0, instance_id)


@pytest.fixture(scope="session")
def gripper():
    return GripperModel.default()


@pytest.fixture(scope="session")
def unit_cube():
    return box_mesh((1.0, 1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("desk")
    write_desk_scene(d)
    return d


@pytest.fixture(scope="session")
def small_config_doc():
    return {
        "sampler": {
            "num_fps_points": 12,
            "alpha_levels": [0.0, float(np.pi / 6)],
            "azimuth_steps": 6,
            "inplane_angles": [float(a) for a in np.pi * np.arange(4) / 4],
            "standoffs": [0.01, 0.03],
        },
        "seed": 7,
    }


def single_scene(*objects):
    return SceneDescription(tuple(objects))
