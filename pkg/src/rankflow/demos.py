"""Built-in demo scenarios.

Each demo is a complete scenario dict (the same schema as scenario
files) with fixed seeds and built-in verdict expectations, so a demo run
is reproducible byte for byte and doubles as an end-to-end check.
"""

import copy
import math

HALF_PI = math.pi / 2.0

_ROTATION_GENERATOR = [[0.0, -1.0], [1.0, 0.0]]

DEMOS: dict = {
    "consensus-basic": {
        "name": "consensus-basic",
        "model": "consensus",
        "params": {"graph": {"n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]]}, "d": 2},
        "x0": {"random": {"d": 2, "n": 3, "rank": 1, "seed": 7}},
        "horizon": [0.0, 5.0],
        "integrator": {"method": "dp54", "rtol": 1e-10, "atol": 1e-13,
                       "sample_interval": 0.1},
        "diagnostics": ["rank", "subspace", "grassmann", "collinearity", "structure"],
        "expect": {"rank": True, "subspace": True, "collinearity": True,
                   "structure": True},
        "output": {"figures_dir": "figures"},
        "seed": 7,
    },
    "collinear-formation": {
        "name": "collinear-formation",
        "model": "distance_formation",
        "params": {"graph": {"n": 3, "edges": [[0, 1], [1, 2]]}, "d": 2,
                   "distances": [1.0, 1.0]},
        "x0": {"explicit": [[0.0, 0.9, 2.1], [0.0, 0.9, 2.1]]},
        "horizon": [0.0, 10.0],
        "integrator": {"method": "dp54", "rtol": 1e-10, "atol": 1e-13,
                       "sample_interval": 0.1},
        "diagnostics": ["rank", "subspace", "collinearity"],
        "expect": {"rank": True, "subspace": True, "collinearity": True},
        "output": {"figures_dir": "figures"},
    },
    "noncollinear-formation": {
        "name": "noncollinear-formation",
        "model": "distance_formation",
        "params": {"graph": {"n": 3, "edges": [[0, 1], [1, 2], [0, 2]]}, "d": 2,
                   "distances": [1.0, 1.0, 1.0]},
        "x0": {"explicit": [[0.0, 1.1, 0.4], [0.0, -0.1, 0.9]]},
        "horizon": [0.0, 10.0],
        "integrator": {"method": "dp54", "rtol": 1e-10, "atol": 1e-13,
                       "sample_interval": 0.1},
        "diagnostics": ["rank", "subspace", "collinearity"],
        "expect": {"rank": True, "subspace": True, "collinearity": True},
        "output": {"figures_dir": "figures"},
    },
    "grassmann-rotation": {
        "name": "grassmann-rotation",
        "model": "decomposed",
        "params": {"drift": _ROTATION_GENERATOR,
                   "coupling": [[0.0, 0.0], [0.0, 0.0]]},
        "x0": {"explicit": [[1.0, 1.0], [0.0, 0.0]]},
        "horizon": [0.0, HALF_PI],
        "integrator": {"method": "dp54", "rtol": 1e-10, "atol": 1e-13,
                       "sample_interval": 0.05},
        "diagnostics": ["rank", "subspace", "grassmann", "structure"],
        "expect": {"rank": True, "subspace": False, "structure": True},
        "output": {"figures_dir": "figures"},
    },
    "structure-violation": {
        "name": "structure-violation",
        "model": "collinear_general",
        "params": {"blocks": [
            [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
            [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
        ]},
        "x0": {"explicit": [[1.0, 1.0], [0.0, 0.0]]},
        "horizon": [0.0, 1.0],
        "integrator": {"method": "dp54", "rtol": 1e-9, "atol": 1e-12,
                       "sample_interval": 0.05},
        "diagnostics": ["rank", "structure"],
        "expect": {"rank": False, "structure": False},
        "output": {"figures_dir": "figures"},
    },
    "signature-symmetric": {
        "name": "signature-symmetric",
        "model": "decomposed",
        "params": {
            "drift": [[0.2, -0.8, 0.3], [0.7, 0.1, -0.4], [-0.3, 0.5, 0.0]],
            "coupling": [[0.2, 0.7, -0.3], [-0.8, 0.1, 0.5], [0.3, -0.4, 0.0]],
        },
        "x0": {"explicit": [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]]},
        "horizon": [0.0, 5.0],
        "integrator": {"method": "dp54", "rtol": 1e-10, "atol": 1e-13,
                       "sample_interval": 0.1},
        "diagnostics": ["rank", "signature", "structure"],
        "expect": {"rank": True, "signature": True, "structure": True},
        "output": {"figures_dir": "figures"},
    },
    "timevarying-couplings": {
        "name": "timevarying-couplings",
        "model": "consensus",
        "params": {"graph": {"n": 4, "edges": [[0, 1, 1.0], [1, 2, 2.0], [2, 3, 1.0]]},
                   "d": 3,
                   "modulation": {"kind": "sinusoidal", "amplitude": 0.5}},
        "x0": {"random": {"d": 3, "n": 4, "rank": 2, "seed": 11}},
        "horizon": [0.0, 10.0],
        "integrator": {"method": "dp54", "rtol": 1e-10, "atol": 1e-13,
                       "sample_interval": 0.1},
        "diagnostics": ["rank", "subspace", "grassmann"],
        "expect": {"rank": True, "subspace": True},
        "output": {"figures_dir": "figures"},
        "seed": 11,
    },
}


def demo_names() -> list:
    return sorted(DEMOS)


def demo_scenario_dict(name: str) -> dict:
    if name not in DEMOS:
        raise KeyError(name)
    return copy.deepcopy(DEMOS[name])
