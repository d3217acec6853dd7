import json

import numpy as np
import pytest

from armctl import ArmGeometry, CostWeights, MassModel


@pytest.fixture(scope="session")
def geom():
    return ArmGeometry(L1=1.0, L2=0.8, L3=0.6)


@pytest.fixture(scope="session")
def masses():
    return MassModel(m2=0.5, m3=0.4, m4=0.3, M1=0.4, M2=0.3, M3=0.2, g=9.81)


@pytest.fixture(scope="session")
def weights():
    return CostWeights.from_diagonals([100.0] * 4 + [1.0] * 4, [1.0] * 4)


@pytest.fixture(scope="session")
def theta_ref():
    # mid-workspace: bent arm, all planar coordinates well off the yaw axis
    return np.array([0.3, 0.8, -0.9, 0.5])


def safe_random_theta(rng, n):
    """Configurations with every joint inertia bounded away from zero."""
    return rng.uniform([-np.pi, 0.3, -2.5, -2.5], [np.pi, 2.8, -0.3, 2.5], size=(n, 4))


CONFIG_TEMPLATE = {
    "geometry": {"L1": 1.0, "L2": 0.8, "L3": 0.6},
    "masses": {"m2": 0.5, "m3": 0.4, "m4": 0.3, "M1": 0.4, "M2": 0.3, "M3": 0.2, "g": 9.81},
    "cost": {"q_diag": [100.0] * 4 + [1.0] * 4, "r_diag": [1.0] * 4},
    "grid": {
        "theta1": {"min": 0.05, "max": 0.55, "count": 2},
        "theta2": {"min": 0.55, "max": 1.05, "count": 2},
        "theta3": {"min": -1.15, "max": -0.65, "count": 2},
        "theta4": {"min": 0.25, "max": 0.75, "count": 2},
    },
    "sim": {"dt": 0.001, "control_period": 0.02, "duration": 5.0},
}


@pytest.fixture()
def write_config(tmp_path):
    """Write a config JSON (optionally patched) and return its path."""

    def _write(patch=None, name="arm.json"):
        cfg = json.loads(json.dumps(CONFIG_TEMPLATE))
        if patch:
            for dotted, value in patch.items():
                node = cfg
                keys = dotted.split(".")
                for key in keys[:-1]:
                    node = node[key]
                node[keys[-1]] = value
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        return str(path)

    return _write
