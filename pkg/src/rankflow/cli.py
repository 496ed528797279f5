"""Command-line interface.

Subcommands:

    simulate         run scenarios, write trajectory CSV / report JSON / figures
    verify           like simulate, but exit 2 when any verdict differs from
                     the scenario's expectations
    check-structure  structural conditions on coupling blocks (scenario file
                     or raw block-samples file), verdict printed as JSON
    demo             run a built-in demo scenario by name

Exit codes: 0 ok, 2 unexpected verdict (verify/demo), 3 input error,
4 numerical failure.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .demos import demo_names, demo_scenario_dict
from .errors import NumericalFailureError, RankflowError, ScenarioError
from .runner import RunReport, run
from .scenario import Scenario, load_scenario, scenario_from_dict
from .structure import (
    BlockSample,
    check_rank_preserving_structure,
    check_signature_preserving_structure,
)

EXIT_OK = 0
EXIT_UNEXPECTED = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4


def _print_summary(report: RunReport, paths: dict | None):
    print(f"[{report.scenario_name}] status={report.status} "
          f"wall={report.wall_time:.3f}s "
          f"nfev={report.trajectory_meta.get('nfev', 'n/a')}")
    if report.error:
        print(f"  error: {report.error}")
    for name, verdict in sorted(report.verdicts.items()):
        marker = "ok" if verdict["as_expected"] else "UNEXPECTED"
        print(f"  {name}: holds={verdict['actual']} "
              f"expected={verdict['expected']} [{marker}]")
    for name, reason in sorted(report.skipped.items()):
        print(f"  {name}: skipped ({reason})")
    if report.oracle_rel_error is not None:
        print(f"  oracle_rel_error: {report.oracle_rel_error:.3e}")
    if paths:
        for key, value in sorted(paths.items()):
            print(f"  wrote {key}: {value}")


def _run_one(scenario: Scenario, out_dir: str | None) -> tuple[RunReport, dict, int]:
    from .runner import output_paths

    report, _traj = run(scenario, out_dir=out_dir, write_artifacts=True)
    paths = output_paths(scenario, out_dir)
    if report.status == "failed":
        return report, {"report_json": paths["report_json"]}, EXIT_NUMERICAL
    return report, paths, EXIT_OK


def _run_scenario_path(path: str, out_dir: str | None) -> tuple[int, bool, str]:
    """Worker for batch mode: (exit code, any unexpected verdict, summary)."""
    import contextlib
    import io

    buf = io.StringIO()
    code = EXIT_OK
    unexpected = False
    try:
        scenario = load_scenario(path)
        with contextlib.redirect_stdout(buf):
            report, paths, code = _run_one(scenario, out_dir)
            _print_summary(report, paths)
        if report.unexpected:
            unexpected = True
            buf.write(f"  unexpected verdicts: {', '.join(report.unexpected)}\n")
    except ScenarioError as exc:
        buf.write(f"[{path}] input error: {exc}\n")
        code = EXIT_INPUT
    except NumericalFailureError as exc:
        buf.write(f"[{path}] numerical failure: {exc}\n")
        code = EXIT_NUMERICAL
    except RankflowError as exc:
        buf.write(f"[{path}] error: {exc}\n")
        code = EXIT_INPUT
    return code, unexpected, buf.getvalue()


def _cmd_batch(paths: list, jobs: int, out_dir: str | None, verify: bool) -> int:
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_scenario_path, p, out_dir) for p in paths]
            results = [f.result() for f in futures]
    else:
        results = [_run_scenario_path(p, out_dir) for p in paths]
    worst = EXIT_OK
    for code, unexpected, text in results:
        sys.stdout.write(text)
        if verify and code == EXIT_OK and unexpected:
            code = EXIT_UNEXPECTED
        worst = max(worst, code)
    return worst


def _cmd_simulate(args) -> int:
    return _cmd_batch(args.scenario, args.jobs, args.outdir, verify=False)


def _cmd_verify(args) -> int:
    return _cmd_batch(args.scenario, args.jobs, args.outdir, verify=True)


def _parse_block_samples(data: dict) -> list:
    samples = []
    for entry in data.get("samples", []):
        blocks = np.array(entry["blocks"], dtype=float)
        samples.append(BlockSample(t=float(entry.get("t", 0.0)), blocks=blocks))
    if not samples:
        raise ScenarioError("block-samples file contains no samples")
    return samples


def _cmd_check_structure(args) -> int:
    with open(args.path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                f"{args.path} is not valid JSON: {exc.msg} "
                f"(line {exc.lineno}, column {exc.colno})"
            ) from exc
    tol = float(args.tol)
    if isinstance(data, dict) and "samples" in data:
        samples = _parse_block_samples(data)
    elif isinstance(data, dict) and "model" in data:
        from .integrate import integrate
        from .structure import blocks_from_trajectory

        scenario = scenario_from_dict(data, name=args.path)
        traj = integrate(scenario.system, scenario.x0, scenario.t0, scenario.t1,
                         scenario.integrator)
        samples = blocks_from_trajectory(scenario.system, traj)
        tol = scenario.tolerances["structure_tol"] if args.tol is None else tol
    else:
        raise ScenarioError(
            f"{args.path} is neither a scenario (needs 'model') nor a "
            "block-samples file (needs 'samples')"
        )
    verdict = check_rank_preserving_structure(samples, tol)
    out = verdict.to_dict()
    if samples[0].d == samples[0].n:
        sig = check_signature_preserving_structure(samples, tol)
        out["satisfies_signature_structure"] = sig.satisfies_signature_structure
    text = json.dumps(out, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.output}")
    else:
        print(text)
    return EXIT_OK


def _cmd_demo(args) -> int:
    if args.list or args.name is None:
        for name in demo_names():
            print(name)
        return EXIT_OK
    try:
        data = demo_scenario_dict(args.name)
    except KeyError:
        print(f"unknown demo {args.name!r}; available: {', '.join(demo_names())}",
              file=sys.stderr)
        return EXIT_INPUT
    scenario = scenario_from_dict(data, name=args.name)
    report, paths, code = _run_one(scenario, args.outdir)
    _print_summary(report, paths)
    if code != EXIT_OK:
        return code
    if report.unexpected:
        print(f"  unexpected verdicts: {', '.join(report.unexpected)}")
        return EXIT_UNEXPECTED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankflow",
        description="Simulate networked coupled systems and check their "
                    "rank, subspace, signature and collinearity invariants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run scenarios and write artifacts")
    p_sim.add_argument("scenario", nargs="+", help="scenario JSON file(s)")
    p_sim.add_argument("--jobs", type=int, default=1,
                       help="run this many scenarios in parallel")
    p_sim.add_argument("--outdir", default=None,
                       help="redirect all artifacts into this directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_ver = sub.add_parser("verify",
                           help="run scenarios; exit 2 on any unexpected verdict")
    p_ver.add_argument("scenario", nargs="+", help="scenario JSON file(s)")
    p_ver.add_argument("--jobs", type=int, default=1)
    p_ver.add_argument("--outdir", default=None)
    p_ver.set_defaults(func=_cmd_verify)

    p_chk = sub.add_parser("check-structure",
                           help="check the coupling-block structure conditions")
    p_chk.add_argument("path", help="scenario file or block-samples JSON file")
    p_chk.add_argument("--tol", type=float, default=1e-9,
                       help="relative tolerance for the structural identities")
    p_chk.add_argument("--output", default=None, help="write the verdict JSON here")
    p_chk.set_defaults(func=_cmd_check_structure)

    p_demo = sub.add_parser("demo", help="run a built-in demo scenario")
    p_demo.add_argument("name", nargs="?", default=None)
    p_demo.add_argument("--list", action="store_true", help="list demo names")
    p_demo.add_argument("--outdir", default="demo-output",
                        help="directory for demo artifacts")
    p_demo.set_defaults(func=_cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (RankflowError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
