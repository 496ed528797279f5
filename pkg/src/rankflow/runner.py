"""Scenario execution: integrate, diagnose, write artifacts.

The report written to disk is deterministic byte for byte for a given
scenario (seeds included): keys are sorted and wall-clock timing is kept
out of the file (it lives on the in-memory report for console display).
"""

import json
import os
import time
from dataclasses import dataclass, field

from .diagnostics import (
    check_collinearity_class,
    check_rank_invariance,
    check_row_subspace_preservation,
    check_signature_preservation,
    check_subspace_preservation,
    grassmann_drift,
)
from .errors import (
    AsymmetricMatrixError,
    DegenerateInputError,
    DimensionMismatchError,
    NumericalFailureError,
    RankNotConstantError,
    ScenarioError,
)
from .integrate import Trajectory, integrate, oracle_error
from .scenario import DIAGNOSTIC_NAMES, Scenario
from .structure import (
    blocks_from_trajectory,
    check_rank_preserving_structure,
    check_signature_preserving_structure,
)

#: Diagnostics whose report carries a boolean verdict to compare against
#: expectations ("grassmann" is a drift series, not a verdict).
_VERDICT_DIAGNOSTICS = (
    "rank", "subspace", "row_subspace", "signature", "collinearity", "structure",
)


@dataclass
class RunReport:
    scenario_name: str
    scenario_echo: dict
    trajectory_meta: dict
    diagnostics: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)
    oracle_rel_error: float | None = None
    verdicts: dict = field(default_factory=dict)
    unexpected: list = field(default_factory=list)
    status: str = "ok"
    error: str | None = None
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_echo,
            "name": self.scenario_name,
            "status": self.status,
            "error": self.error,
            "trajectory": self.trajectory_meta,
            "diagnostics": self.diagnostics,
            "skipped": self.skipped,
            "oracle_rel_error": self.oracle_rel_error,
            "verdicts": self.verdicts,
            "unexpected": self.unexpected,
        }


def _applicable_diagnostics(scenario: Scenario) -> tuple:
    if scenario.diagnostics:
        return scenario.diagnostics
    system = scenario.system
    names = ["rank", "subspace", "row_subspace", "grassmann", "structure"]
    if system.d == system.n:
        names.append("signature")
    if system.d in (2, 3):
        names.append("collinearity")
    return tuple(n for n in DIAGNOSTIC_NAMES if n in names)


def _run_diagnostic(name: str, scenario: Scenario, traj: Trajectory) -> dict:
    tol = scenario.tolerances
    rank_tol = tol["rank_rel_tol"]
    if name == "rank":
        return check_rank_invariance(traj, rank_tol).to_dict()
    if name == "subspace":
        return check_subspace_preservation(
            traj, rank_tol, tol["subspace_threshold"]).to_dict()
    if name == "row_subspace":
        return check_row_subspace_preservation(
            traj, rank_tol, tol["subspace_threshold"]).to_dict()
    if name == "grassmann":
        return grassmann_drift(traj, rank_tol).to_dict()
    if name == "signature":
        return check_signature_preservation(traj, rank_tol).to_dict()
    if name == "collinearity":
        through, affine = check_collinearity_class(traj, rank_tol)
        return {"through_origin": through.to_dict(), "affine": affine.to_dict()}
    if name == "structure":
        samples = blocks_from_trajectory(scenario.system, traj)
        verdict = check_rank_preserving_structure(samples, tol["structure_tol"])
        out = verdict.to_dict()
        if scenario.system.d == scenario.system.n:
            sig = check_signature_preserving_structure(samples, tol["structure_tol"])
            out["satisfies_signature_structure"] = sig.satisfies_signature_structure
        out["checked_at"] = "trajectory samples"
        return out
    raise ScenarioError(f"unknown diagnostic {name!r}")


def _verdict_of(name: str, report: dict) -> bool | None:
    if name in ("rank", "subspace", "row_subspace", "signature"):
        return bool(report["holds"])
    if name == "collinearity":
        return bool(report["through_origin"]["holds"] and report["affine"]["holds"])
    if name == "structure":
        return bool(report["satisfies_rank_structure"])
    return None


def run(scenario: Scenario, out_dir: str | None = None,
        write_artifacts: bool = True) -> tuple[RunReport, Trajectory | None]:
    """Integrate the scenario, run its diagnostics, write artifacts.

    Verdict-bearing diagnostics are compared against the scenario's
    expectations (default: everything holds); mismatches land in
    ``report.unexpected``.  An integration failure does not raise: it is
    recorded on the report (status "failed") and, when artifacts are
    requested, still written to the report JSON so the failure leaves a
    trace on disk.
    """
    started = time.perf_counter()
    try:
        traj = integrate(scenario.system, scenario.x0, scenario.t0, scenario.t1,
                         scenario.integrator)
    except NumericalFailureError as exc:
        report = RunReport(
            scenario_name=scenario.name,
            scenario_echo=scenario.echo,
            trajectory_meta={"failure_time": exc.time},
            status="failed",
            error=str(exc),
        )
        report.wall_time = time.perf_counter() - started
        if write_artifacts:
            paths = output_paths(scenario, out_dir)
            parent = os.path.dirname(paths["report_json"])
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(paths["report_json"], "w", encoding="utf-8", newline="") as fh:
                fh.write(report_json_text(report))
        return report, None

    report = RunReport(
        scenario_name=scenario.name,
        scenario_echo=scenario.echo,
        trajectory_meta=dict(traj.meta),
    )
    requested = _applicable_diagnostics(scenario)
    explicit = bool(scenario.diagnostics)
    for name in requested:
        try:
            report.diagnostics[name] = _run_diagnostic(name, scenario, traj)
        except (RankNotConstantError, DegenerateInputError, DimensionMismatchError,
                AsymmetricMatrixError) as exc:
            # Auto-selected diagnostics skip quietly when inapplicable;
            # explicitly requested ones surface the reason.
            if explicit:
                raise
            report.skipped[name] = str(exc)

    if scenario.system.kind.is_constant:
        report.oracle_rel_error = oracle_error(traj, scenario.system)

    for name in requested:
        if name not in report.diagnostics or name not in _VERDICT_DIAGNOSTICS:
            continue
        actual = _verdict_of(name, report.diagnostics[name])
        expected = scenario.expect.get(name, True)
        report.verdicts[name] = {"expected": expected, "actual": actual,
                                 "as_expected": actual == expected}
        if actual != expected:
            report.unexpected.append(name)

    report.wall_time = time.perf_counter() - started
    if write_artifacts:
        write_run_artifacts(scenario, traj, report, out_dir)
    return report, traj


def trajectory_csv_text(traj: Trajectory) -> str:
    """Render a trajectory as CSV: t, then agent 1's d components, agent 2's, ...

    Header names are 1-based (x_<component>_<agent>); values carry 17
    significant digits.
    """
    d, n = traj.d, traj.n
    header = ["t"] + [f"x_{c + 1}_{a + 1}" for a in range(n) for c in range(d)]
    lines = [",".join(header)]
    for tk, Xk in zip(traj.times, traj.states):
        row = [f"{float(tk):.17g}"]
        row += [f"{float(Xk[c, a]):.17g}" for a in range(n) for c in range(d)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def report_json_text(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def output_paths(scenario: Scenario, out_dir: str | None = None) -> dict:
    """Resolve artifact paths from the scenario, defaulting off its name.

    When ``out_dir`` is given, artifacts land inside it (keeping the
    configured basenames).
    """
    base = scenario.output or {}
    stem = scenario.name
    paths = {
        "trajectory_csv": base.get("trajectory_csv", f"{stem}.trajectory.csv"),
        "report_json": base.get("report_json", f"{stem}.report.json"),
    }
    if "figures_dir" in base:
        paths["figures_dir"] = base["figures_dir"]
    if out_dir:
        paths = {key: os.path.join(out_dir, os.path.basename(path.rstrip("/")))
                 for key, path in paths.items()}
    return paths


def write_run_artifacts(scenario: Scenario, traj: Trajectory, report: RunReport,
                        out_dir: str | None = None) -> dict:
    """Write the CSV, the report JSON and (when configured) figures."""
    paths = output_paths(scenario, out_dir)
    for key in ("trajectory_csv", "report_json"):
        parent = os.path.dirname(paths[key])
        if parent:
            os.makedirs(parent, exist_ok=True)
    with open(paths["trajectory_csv"], "w", encoding="utf-8", newline="") as fh:
        fh.write(trajectory_csv_text(traj))
    with open(paths["report_json"], "w", encoding="utf-8", newline="") as fh:
        fh.write(report_json_text(report))
    written = {"trajectory_csv": paths["trajectory_csv"],
               "report_json": paths["report_json"]}
    if "figures_dir" in paths:
        from .plotting import render_figures
        written["figures"] = render_figures(traj, report, paths["figures_dir"])
    return written
