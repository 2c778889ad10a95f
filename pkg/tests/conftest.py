import numpy as np
import pytest

from handsim.hand import load_hand_spec
from handsim.scene import build_scene


@pytest.fixture(scope="session")
def hand_spec():
    return load_hand_spec()


def table_scene_descriptor(**overrides):
    desc = {
        "schema_version": 1,
        "plane": "side",
        "hand": {"mount": [0, 75, 0, 0, 0, 0], "skin": "soft", "finger": "soft"},
        "fixtures": [{"kind": "table", "height": 0.0}],
        "objects": [
            {"name": "box", "footprint": [[-25, -25], [25, -25], [25, 25], [-25, 25]],
             "height": 60, "mass_g": 100, "pose": [115, 30, 0.0]}
        ],
    }
    desc.update(overrides)
    return desc


@pytest.fixture
def table_scene():
    return build_scene(table_scene_descriptor())
