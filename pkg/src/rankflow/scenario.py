"""Scenario files: the JSON surface of the command-line tool.

A scenario names a model from the built-in catalog, its parameters, an
initial state (explicit or seeded random with a rank constraint), the
horizon, integrator settings, the diagnostics to run and where to write
artifacts.  Everything downstream of a scenario is deterministic given
the file contents, seeds included.

Schema (top-level keys):

    model        one of the catalog names below
    params       model parameters (see the builder docstrings)
    x0           {"explicit": [[...]]} or
                 {"random": {"d": int, "n": int, "rank": int, "seed": int}}
    horizon      [t0, t1]
    integrator   {"method": "dp54"|"rk4", "rtol", "atol", "h", "sample_interval"}
    diagnostics  subset of ["rank", "subspace", "row_subspace", "grassmann",
                 "signature", "collinearity", "structure"]; empty/absent
                 means "every diagnostic applicable to the system"
    tolerances   {"rank_rel_tol", "subspace_threshold", "structure_tol"}
    expect       {diagnostic: bool} verdict expectations (verify mode);
                 unlisted diagnostics are expected to hold
    output       {"trajectory_csv", "report_json", "figures_dir"}
    name, seed   free-form echo fields
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, ScenarioError
from .integrate import IntegratorConfig
from .linalg import numerical_rank
from .models import (
    FormationTarget,
    Graph,
    affine_coordination,
    collinear_general,
    consensus,
    distance_formation,
    linear_sync_type1,
    linear_sync_type2,
    matrix_weighted_consensus,
)
from .structure import build_from_decomposition
from .system import CoupledSystem

DIAGNOSTIC_NAMES = (
    "rank", "subspace", "row_subspace", "grassmann", "signature",
    "collinearity", "structure",
)

DEFAULT_TOLERANCES = {
    "rank_rel_tol": 1e-8,
    "subspace_threshold": 1e-6,
    "structure_tol": 1e-9,
}

MODEL_NAMES = (
    "consensus", "distance_formation", "affine_coordination",
    "matrix_weighted_consensus", "linear_sync_type1", "linear_sync_type2",
    "collinear_general", "decomposed",
)


def random_rank_state(d: int, n: int, rank: int, seed: int) -> np.ndarray:
    """Seeded d-by-n state with prescribed rank.

    Built as the product of d-by-r and r-by-n standard-normal factors,
    which has rank r almost surely; the result is checked post hoc.
    """
    if not (1 <= rank <= min(d, n)):
        raise ScenarioError(f"rank must be in [1, {min(d, n)}], got {rank}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((d, rank)) @ rng.standard_normal((rank, n))
    if numerical_rank(X) != rank:
        raise ScenarioError(
            f"seeded state unexpectedly failed its rank-{rank} check; pick another seed"
        )
    return X


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    params: dict
    system: CoupledSystem
    x0: np.ndarray
    t0: float
    t1: float
    integrator: IntegratorConfig
    diagnostics: tuple
    tolerances: dict
    expect: dict
    output: dict
    seed: int | None
    echo: dict = field(default_factory=dict)


def _require(cond: bool, message: str):
    if not cond:
        raise ScenarioError(message)


def _parse_graph(obj) -> Graph:
    _require(isinstance(obj, dict), "graph must be an object with 'n' and 'edges'")
    _require("n" in obj, "graph needs a vertex count 'n'")
    edges = obj.get("edges", [])
    _require(isinstance(edges, list), "graph edges must be a list")
    try:
        return Graph(n=int(obj["n"]), edges=tuple(tuple(e) for e in edges),
                     directed=bool(obj.get("directed", False)))
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"bad graph: {exc}") from exc


def _modulation_fn(obj):
    if obj is None:
        return None
    _require(isinstance(obj, dict) and "kind" in obj, "modulation needs a 'kind'")
    if obj["kind"] == "sinusoidal":
        amplitude = float(obj.get("amplitude", 0.5))
        frequency = float(obj.get("frequency", 1.0))
        return lambda t: 1.0 + amplitude * math.sin(frequency * t)
    raise ScenarioError(f"unknown modulation kind {obj['kind']!r}")


def _edge_gain_fn(obj):
    _require(isinstance(obj, dict) and "kind" in obj, "edge gain needs a 'kind'")
    if obj["kind"] == "constant":
        value = float(obj.get("value", 1.0))
        return lambda i, j, t, X: value
    if obj["kind"] == "sin_offset":
        amplitude = float(obj.get("amplitude", 1.0))
        offset = float(obj.get("offset", 0.0))
        frequency = float(obj.get("frequency", 1.0))
        return lambda i, j, t, X: offset + amplitude * math.sin(frequency * t)
    raise ScenarioError(f"unknown edge gain kind {obj['kind']!r}")


def _matrix_param(obj, name: str) -> np.ndarray:
    try:
        m = np.array(obj, dtype=float)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{name} must be a numeric matrix: {exc}") from exc
    _require(m.ndim == 2, f"{name} must be a 2-D matrix")
    _require(bool(np.isfinite(m).all()), f"{name} has non-finite entries")
    return m


def _time_poly_matrix(params: dict, base_key: str, varying_key: str):
    """Constant matrix, or t -> M0 + sin(t) * M1 when a varying part is given."""
    M0 = _matrix_param(params[base_key], base_key)
    spec = params.get(varying_key)
    if spec is None:
        return M0
    _require(isinstance(spec, dict) and spec.get("kind") == "sinusoidal",
             f"{varying_key} supports only {{'kind': 'sinusoidal', 'matrix': ...}}")
    M1 = _matrix_param(spec["matrix"], f"{varying_key}.matrix")
    _require(M1.shape == M0.shape, f"{varying_key}.matrix must match {base_key}")
    frequency = float(spec.get("frequency", 1.0))
    return lambda t: M0 + math.sin(frequency * t) * M1


def _build_model(model: str, params: dict) -> CoupledSystem:
    if model == "consensus":
        graph = _parse_graph(params.get("graph"))
        d = int(params.get("d", 2))
        return consensus(graph, d, modulation=_modulation_fn(params.get("modulation")))
    if model == "distance_formation":
        graph = _parse_graph(params.get("graph"))
        d = int(params.get("d", 2))
        distances = params.get("distances")
        _require(isinstance(distances, list), "distance_formation needs 'distances'")
        gain = params.get("gain", "quadratic")
        _require(gain == "quadratic",
                 "scenario files support only the quadratic gain; custom gains are API-level")
        target = FormationTarget.from_edge_list(graph, [float(x) for x in distances])
        return distance_formation(graph, target, d)
    if model == "affine_coordination":
        graph = _parse_graph(params.get("graph"))
        d = int(params.get("d", 2))
        return affine_coordination(graph, d, _edge_gain_fn(params.get("u")))
    if model == "matrix_weighted_consensus":
        graph = _parse_graph(params.get("graph"))
        blocks = params.get("blocks")
        _require(isinstance(blocks, list), "matrix_weighted_consensus needs 'blocks'")
        return matrix_weighted_consensus(
            graph, [_matrix_param(b, f"blocks[{k}]") for k, b in enumerate(blocks)]
        )
    if model == "linear_sync_type1":
        graph = _parse_graph(params.get("graph"))
        A = np.array(params.get("A"), dtype=float)
        b = [float(x) for x in params.get("b", [])]
        return linear_sync_type1(graph, A, b)
    if model == "linear_sync_type2":
        graph = _parse_graph(params.get("graph"))
        A = np.array(params.get("A"), dtype=float)
        blocks = params.get("blocks")
        _require(isinstance(blocks, list), "linear_sync_type2 needs 'blocks'")
        return linear_sync_type2(
            graph, A, [_matrix_param(b, f"blocks[{k}]") for k, b in enumerate(blocks)]
        )
    if model == "collinear_general":
        blocks = params.get("blocks")
        _require(blocks is not None, "collinear_general needs the full 'blocks' grid")
        try:
            return collinear_general(np.array(blocks, dtype=float))
        except (ValueError, DimensionMismatchError) as exc:
            raise ScenarioError(f"bad blocks grid: {exc}") from exc
    if model == "decomposed":
        _require("drift" in params and "coupling" in params,
                 "decomposed needs 'drift' (d x d) and 'coupling' (n x n)")
        drift = _time_poly_matrix(params, "drift", "drift_varying")
        coupling = _time_poly_matrix(params, "coupling", "coupling_varying")
        d = (drift(0.0) if callable(drift) else drift).shape[0]
        n = (coupling(0.0) if callable(coupling) else coupling).shape[0]
        spec = build_from_decomposition(drift, coupling, n=n, d=d)
        return CoupledSystem(spec=spec, label=f"decomposed(n={n}, d={d})")
    raise ScenarioError(f"unknown model {model!r} (known: {', '.join(MODEL_NAMES)})")


def _parse_x0(obj, system: CoupledSystem) -> tuple[np.ndarray, int | None]:
    d, n = system.d, system.n
    _require(isinstance(obj, dict), "x0 must be {'explicit': ...} or {'random': ...}")
    if "explicit" in obj:
        X0 = _matrix_param(obj["explicit"], "x0.explicit")
        if X0.shape != (d, n):
            raise ScenarioError(
                f"x0 has shape {X0.shape[0]}x{X0.shape[1]}, expected {d}x{n}"
            )
        return X0, None
    if "random" in obj:
        spec = obj["random"]
        _require(isinstance(spec, dict), "x0.random must be an object")
        _require("seed" in spec, "x0.random needs a 'seed' (randomness must be seeded)")
        rd, rn = int(spec.get("d", d)), int(spec.get("n", n))
        if (rd, rn) != (d, n):
            raise ScenarioError(
                f"x0.random dims {rd}x{rn} do not match the model's {d}x{n}"
            )
        rank = int(spec.get("rank", min(d, n)))
        seed = int(spec["seed"])
        return random_rank_state(d, n, rank, seed), seed
    raise ScenarioError("x0 must contain 'explicit' or 'random'")


def scenario_from_dict(data: dict, name: str = "scenario") -> Scenario:
    _require(isinstance(data, dict), "scenario root must be a JSON object")
    _require("model" in data, "scenario needs a 'model'")
    model = data["model"]
    _require(isinstance(model, str), "'model' must be a string")
    params = data.get("params", {})
    _require(isinstance(params, dict), "'params' must be an object")
    system = _build_model(model, params)

    _require("x0" in data, "scenario needs an initial state 'x0'")
    x0, x0_seed = _parse_x0(data["x0"], system)

    horizon = data.get("horizon", [0.0, 10.0])
    _require(isinstance(horizon, list) and len(horizon) == 2,
             "'horizon' must be [t0, t1]")
    t0, t1 = float(horizon[0]), float(horizon[1])
    _require(t1 > t0, f"horizon needs t1 > t0, got [{t0}, {t1}]")

    integ = data.get("integrator", {})
    _require(isinstance(integ, dict), "'integrator' must be an object")
    unknown = set(integ) - {"method", "rtol", "atol", "h", "sample_interval"}
    _require(not unknown, f"unknown integrator keys: {sorted(unknown)}")
    try:
        cfg = IntegratorConfig(
            method=integ.get("method", "dp54"),
            h=float(integ.get("h", 0.01)),
            rtol=float(integ.get("rtol", 1e-9)),
            atol=float(integ.get("atol", 1e-12)),
            sample_interval=float(integ.get("sample_interval", 0.1)),
        )
    except ValueError as exc:
        raise ScenarioError(f"bad integrator config: {exc}") from exc

    diagnostics = data.get("diagnostics", [])
    _require(isinstance(diagnostics, list), "'diagnostics' must be a list")
    for diag in diagnostics:
        _require(diag in DIAGNOSTIC_NAMES,
                 f"unknown diagnostic {diag!r} (known: {', '.join(DIAGNOSTIC_NAMES)})")

    tolerances = dict(DEFAULT_TOLERANCES)
    tol_in = data.get("tolerances", {})
    _require(isinstance(tol_in, dict), "'tolerances' must be an object")
    unknown = set(tol_in) - set(DEFAULT_TOLERANCES)
    _require(not unknown, f"unknown tolerance keys: {sorted(unknown)}")
    for key, value in tol_in.items():
        value = float(value)
        _require(value > 0, f"tolerance {key} must be positive")
        tolerances[key] = value

    expect = data.get("expect", {})
    _require(isinstance(expect, dict), "'expect' must be an object")
    for key, value in expect.items():
        _require(key in DIAGNOSTIC_NAMES, f"unknown diagnostic in expect: {key!r}")
        _require(isinstance(value, bool), f"expect[{key!r}] must be true or false")

    output = data.get("output", {})
    _require(isinstance(output, dict), "'output' must be an object")
    unknown = set(output) - {"trajectory_csv", "report_json", "figures_dir"}
    _require(not unknown, f"unknown output keys: {sorted(unknown)}")

    seed = data.get("seed", x0_seed)
    echo = {k: data[k] for k in
            ("model", "params", "x0", "horizon", "integrator", "diagnostics",
             "tolerances", "expect", "seed", "name")
            if k in data}
    return Scenario(
        name=str(data.get("name", name)),
        model=model,
        params=params,
        system=system,
        x0=x0,
        t0=t0,
        t1=t1,
        integrator=cfg,
        diagnostics=tuple(diagnostics),
        tolerances=tolerances,
        expect=dict(expect),
        output=dict(output),
        seed=None if seed is None else int(seed),
        echo=echo,
    )


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"scenario {path} is not valid JSON: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})"
        ) from exc
    name = os.path.splitext(os.path.basename(path))[0]
    return scenario_from_dict(data, name=name)
