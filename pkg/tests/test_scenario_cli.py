import json

import numpy as np
import pytest

from rankflow.cli import main
from rankflow.errors import ScenarioError
from rankflow.linalg import numerical_rank
from rankflow.runner import run, trajectory_csv_text
from rankflow.scenario import load_scenario, random_rank_state, scenario_from_dict

MINIMAL_CONSENSUS = {
    "model": "consensus",
    "params": {"graph": {"n": 3, "edges": [[0, 1, 0.3], [1, 2, 0.3]]}, "d": 2},
    "x0": {"random": {"d": 2, "n": 3, "rank": 1, "seed": 5}},
}


def write_scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestScenarioLoading:
    def test_minimal_defaults_filled(self, tmp_path):
        path = write_scenario(tmp_path, MINIMAL_CONSENSUS)
        sc = load_scenario(path)
        assert sc.model == "consensus"
        assert (sc.t0, sc.t1) == (0.0, 10.0)
        assert sc.integrator.method == "dp54"
        assert sc.tolerances["rank_rel_tol"] == 1e-8
        assert sc.x0.shape == (2, 3)
        assert numerical_rank(sc.x0) == 1

    def test_unknown_model(self, tmp_path):
        path = write_scenario(tmp_path, {**MINIMAL_CONSENSUS, "model": "nope"})
        with pytest.raises(ScenarioError, match="unknown model"):
            load_scenario(path)

    def test_wrong_x0_shape_names_expected_dims(self, tmp_path):
        bad = dict(MINIMAL_CONSENSUS)
        bad["x0"] = {"explicit": [[0.0, 1.0], [0.0, 1.0]]}
        path = write_scenario(tmp_path, bad)
        with pytest.raises(ScenarioError, match="expected 2x3"):
            load_scenario(path)

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"model": "consensus",\n  "oops"\n}', encoding="utf-8")
        with pytest.raises(ScenarioError, match=r"line \d+, column \d+"):
            load_scenario(str(path))

    def test_unknown_diagnostic(self):
        with pytest.raises(ScenarioError, match="unknown diagnostic"):
            scenario_from_dict({**MINIMAL_CONSENSUS, "diagnostics": ["what"]})

    def test_unseeded_random_rejected(self):
        bad = dict(MINIMAL_CONSENSUS)
        bad["x0"] = {"random": {"d": 2, "n": 3, "rank": 1}}
        with pytest.raises(ScenarioError, match="seed"):
            scenario_from_dict(bad)

    def test_random_rank_state_rank(self):
        X = random_rank_state(4, 6, 2, seed=9)
        assert X.shape == (4, 6)
        assert numerical_rank(X) == 2


class TestRunArtifacts:
    def scenario(self, tmp_path, extra=None):
        data = dict(MINIMAL_CONSENSUS)
        data["horizon"] = [0.0, 2.0]
        data["diagnostics"] = ["rank", "subspace", "structure"]
        data["output"] = {
            "trajectory_csv": str(tmp_path / "traj.csv"),
            "report_json": str(tmp_path / "report.json"),
        }
        if extra:
            data.update(extra)
        return scenario_from_dict(data, name="unit")

    def test_writes_csv_and_json(self, tmp_path):
        sc = self.scenario(tmp_path)
        report, traj = run(sc)
        assert report.status == "ok"
        csv_text = (tmp_path / "traj.csv").read_text()
        header = csv_text.splitlines()[0].split(",")
        assert header == ["t", "x_1_1", "x_2_1", "x_1_2", "x_2_2", "x_1_3", "x_2_3"]
        assert len(csv_text.splitlines()) == len(traj.times) + 1
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["diagnostics"]["rank"]["holds"] is True
        assert payload["verdicts"]["structure"]["as_expected"] is True

    def test_csv_has_17_significant_digits(self, tmp_path):
        sc = self.scenario(tmp_path)
        _, traj = run(sc, write_artifacts=False)
        line = trajectory_csv_text(traj).splitlines()[2]
        value = line.split(",")[1]
        assert float(value) == traj.states[1][0, 0]
        digits = value.replace("-", "").replace(".", "").split("e")[0].lstrip("0")
        assert len(digits) >= 16

    def test_byte_determinism(self, tmp_path):
        texts = []
        for attempt in ("a", "b"):
            out = tmp_path / attempt
            out.mkdir()
            sc = self.scenario(out)
            sc = scenario_from_dict({**MINIMAL_CONSENSUS,
                                     "horizon": [0.0, 2.0],
                                     "diagnostics": ["rank", "subspace"],
                                     "output": {
                                         "trajectory_csv": str(out / "t.csv"),
                                         "report_json": str(out / "r.json"),
                                     }}, name="det")
            run(sc)
            texts.append(((out / "t.csv").read_bytes(), (out / "r.json").read_bytes()))
        assert texts[0] == texts[1]

    def test_figures_rendered_when_configured(self, tmp_path):
        data = dict(MINIMAL_CONSENSUS)
        data["horizon"] = [0.0, 1.0]
        data["output"] = {
            "trajectory_csv": str(tmp_path / "t.csv"),
            "report_json": str(tmp_path / "r.json"),
            "figures_dir": str(tmp_path / "figs"),
        }
        run(scenario_from_dict(data, name="figs"))
        assert (tmp_path / "figs" / "trajectory.png").exists()
        assert (tmp_path / "figs" / "diagnostics.png").exists()

    def test_integration_failure_recorded_in_report(self, tmp_path):
        # A repulsive gain makes the disagreement grow like e^{60 t}, which
        # overflows doubles near t = 709/60 ~ 11.8, well inside the horizon.
        data = {
            "model": "affine_coordination",
            "params": {"graph": {"n": 2, "edges": [[0, 1]]}, "d": 1,
                       "u": {"kind": "constant", "value": -30.0}},
            "x0": {"explicit": [[0.0, 1.0]]},
            "horizon": [0.0, 15.0],
            "output": {"report_json": str(tmp_path / "fail.json"),
                       "trajectory_csv": str(tmp_path / "fail.csv")},
        }
        report, traj = run(scenario_from_dict(data, name="fail"))
        assert report.status == "failed" and traj is None
        payload = json.loads((tmp_path / "fail.json").read_text())
        assert payload["status"] == "failed"
        assert "underflow" in payload["error"] or "non-finite" in payload["error"]


class TestCli:
    def test_simulate_exit_zero(self, tmp_path, capsys):
        path = write_scenario(tmp_path, {**MINIMAL_CONSENSUS, "horizon": [0.0, 1.0]})
        code = main(["simulate", path, "--outdir", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "scenario.trajectory.csv").exists()

    def test_simulate_unknown_model_exit_3(self, tmp_path, capsys):
        path = write_scenario(tmp_path, {**MINIMAL_CONSENSUS, "model": "nope"})
        assert main(["simulate", path]) == 3

    def test_verify_exit_zero_when_expected(self, tmp_path, capsys):
        data = {**MINIMAL_CONSENSUS, "horizon": [0.0, 1.0],
                "diagnostics": ["rank", "subspace"]}
        path = write_scenario(tmp_path, data)
        assert main(["verify", path, "--outdir", str(tmp_path / "v")]) == 0

    def test_verify_exit_two_on_unexpected(self, tmp_path, capsys):
        # Rotation drift breaks subspace preservation; expecting it to hold
        # must trip the verify gate.
        data = {
            "model": "decomposed",
            "params": {"drift": [[0.0, -1.0], [1.0, 0.0]],
                       "coupling": [[0.0, 0.0], [0.0, 0.0]]},
            "x0": {"explicit": [[1.0, 1.0], [0.0, 0.0]]},
            "horizon": [0.0, 1.0],
            "diagnostics": ["rank", "subspace"],
            "expect": {"rank": True, "subspace": True},
        }
        path = write_scenario(tmp_path, data)
        assert main(["verify", path, "--outdir", str(tmp_path / "v")]) == 2

    def test_jobs_batch(self, tmp_path, capsys):
        paths = [
            write_scenario(tmp_path, {**MINIMAL_CONSENSUS, "horizon": [0.0, 1.0],
                                      "name": f"s{k}"}, name=f"s{k}.json")
            for k in range(3)
        ]
        code = main(["simulate", *paths, "--jobs", "3",
                     "--outdir", str(tmp_path / "batch")])
        assert code == 0
        for k in range(3):
            assert (tmp_path / "batch" / f"s{k}.report.json").exists()

    def test_numerical_failure_exit_4(self, tmp_path, capsys):
        data = {
            "model": "affine_coordination",
            "params": {"graph": {"n": 2, "edges": [[0, 1]]}, "d": 1,
                       "u": {"kind": "constant", "value": -30.0}},
            "x0": {"explicit": [[0.0, 1.0]]},
            "horizon": [0.0, 15.0],
        }
        path = write_scenario(tmp_path, data)
        assert main(["simulate", path, "--outdir", str(tmp_path / "f")]) == 4


class TestCheckStructureCommand:
    def test_scenario_input(self, tmp_path, capsys):
        data = {
            "model": "matrix_weighted_consensus",
            "params": {"graph": {"n": 2, "edges": [[0, 1]]},
                       "blocks": [[[1.0, 0.0], [0.0, 2.0]]]},
            "x0": {"explicit": [[1.0, 0.0], [0.0, 1.0]]},
            "horizon": [0.0, 1.0],
        }
        path = write_scenario(tmp_path, data)
        assert main(["check-structure", path]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["satisfies_rank_structure"] is False
        assert payload["violations"]

    def test_block_samples_input(self, tmp_path, capsys):
        # Blocks built from the drift A = [[0,1],[1,0]] with coupling
        # scalars a_ij = A_ij: diagonal blocks are A itself (a_ii = 0) and
        # off-diagonal blocks are the identity, so both structural
        # conditions hold.
        exch = [[0.0, 1.0], [1.0, 0.0]]
        eye2 = [[1.0, 0.0], [0.0, 1.0]]
        data = {"samples": [{"t": 0.0, "blocks": [[exch, eye2], [eye2, exch]]}]}
        path = write_scenario(tmp_path, data, name="samples.json")
        out_file = tmp_path / "verdict.json"
        assert main(["check-structure", path, "--output", str(out_file)]) == 0
        payload = json.loads(out_file.read_text())
        assert payload["satisfies_rank_structure"] is True
        assert payload["satisfies_signature_structure"] is True

    def test_garbage_input_exit_3(self, tmp_path, capsys):
        path = write_scenario(tmp_path, {"neither": True})
        assert main(["check-structure", path]) == 3


class TestDemos:
    @pytest.mark.parametrize("name", [
        "consensus-basic", "collinear-formation", "noncollinear-formation",
        "grassmann-rotation", "structure-violation", "signature-symmetric",
        "timevarying-couplings",
    ])
    def test_demo_runs_clean(self, name, tmp_path, capsys):
        assert main(["demo", name, "--outdir", str(tmp_path / name)]) == 0
        assert (tmp_path / name / f"{name}.report.json").exists()
        assert (tmp_path / name / f"{name}.trajectory.csv").exists()
        assert (tmp_path / name / "figures" / "trajectory.png").exists()

    def test_demo_list(self, capsys):
        assert main(["demo", "--list"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert "grassmann-rotation" in out and len(out) == 7

    def test_demo_unknown_name(self, capsys):
        assert main(["demo", "not-a-demo"]) == 3

    def test_demos_finish_quickly(self, tmp_path):
        from rankflow.demos import demo_names, demo_scenario_dict

        for name in demo_names():
            sc = scenario_from_dict(demo_scenario_dict(name), name=name)
            report, _ = run(sc, out_dir=str(tmp_path / name))
            assert report.wall_time < 5.0

    def test_demo_rerun_byte_identical(self, tmp_path, capsys):
        blobs = []
        for attempt in ("one", "two"):
            outdir = tmp_path / attempt
            assert main(["demo", "consensus-basic", "--outdir", str(outdir)]) == 0
            blobs.append((
                (outdir / "consensus-basic.report.json").read_bytes(),
                (outdir / "consensus-basic.trajectory.csv").read_bytes(),
            ))
        assert blobs[0] == blobs[1]
