import json
import shlex
from pathlib import Path

import pytest

from conftest import STUB_RUNNER_CMD, make_problem
from effbench.cli import main
from effbench.problems import write_problemset

STUB = shlex.join(STUB_RUNNER_CMD)


@pytest.fixture
def workspace(tmp_path):
    uncal = make_problem(time_limit=None, reference_times=((0, 0), (0,), (0,), (0,)))
    manifest = tmp_path / "problemset.json"
    write_problemset([uncal], manifest)
    references = tmp_path / "references"
    references.mkdir()
    (references / "demo.json").write_text(json.dumps({"behavior": "identity_times"}))
    samples = tmp_path / "samples" / "demo"
    samples.mkdir(parents=True)
    (samples / "0.json").write_text(json.dumps({"behavior": "identity_times", "scale": 1.0}))
    (samples / "1.json").write_text(
        json.dumps({"behavior": "replay", "default": {"status": "wrong_output"}})
    )
    (samples / "2.json").write_text(
        json.dumps(
            {
                "behavior": "replay",
                "records": {
                    "L0.0": {"status": "ok", "timings_s": [1e-3] * 6},
                    "L0.1": {"status": "ok", "timings_s": [1e-3] * 6},
                },
                "default": {"status": "timeout", "timings_s": [1.0]},
            }
        )
    )
    return tmp_path


def calibrate(ws):
    code = main(
        [
            "calibrate",
            "--problemset", str(ws / "problemset.json"),
            "--references", str(ws / "references"),
            "--runner", STUB,
            "--out", str(ws / "calibrated.json"),
        ]
    )
    assert code == 0
    return ws / "calibrated.json"


def evaluate(ws, calibrated):
    return main(
        [
            "evaluate",
            "--problemset", str(calibrated),
            "--samples", str(ws / "samples"),
            "--runner", STUB,
            "--out", str(ws / "results.jsonl"),
        ]
    )


def read_results(ws):
    lines = (ws / "results.jsonl").read_text().splitlines()
    return [json.loads(l) for l in lines if l.strip()]


class TestPipeline:
    def test_calibrate_writes_calibrated_manifest(self, workspace):
        calibrated = calibrate(workspace)
        doc = json.loads(calibrated.read_text())
        problem = doc["problems"][0]
        assert problem["time_limit_s"] > 0
        refs = [
            c["reference_time_s"] for lvl in problem["levels"] for c in lvl["cases"]
        ]
        assert all(r > 0 for r in refs)
        assert problem["time_limit_s"] == pytest.approx(2 * max(refs))

    def test_calibrate_missing_reference_exits_2(self, workspace):
        (workspace / "references" / "demo.json").unlink()
        code = main(
            [
                "calibrate",
                "--problemset", str(workspace / "problemset.json"),
                "--references", str(workspace / "references"),
                "--runner", STUB,
                "--out", str(workspace / "calibrated.json"),
            ]
        )
        assert code == 2

    def test_alpha_override_validated_before_execution(self, workspace):
        code = main(
            [
                "calibrate",
                "--problemset", str(workspace / "problemset.json"),
                "--references", str(workspace / "references"),
                "--runner", STUB,
                "--out", str(workspace / "calibrated.json"),
                "--alpha", "1.0",
            ]
        )
        assert code == 2

    def test_evaluate_and_score(self, workspace):
        calibrated = calibrate(workspace)
        code = evaluate(workspace, calibrated)
        assert code == 1  # wrong-output candidate recorded
        records = {r["sample_index"]: r for r in read_results(workspace)}
        assert len(records) == 3
        assert records[0]["correct"] and records[0]["efficiency_score"] == pytest.approx(1.0, abs=1e-6)
        assert not records[1]["correct"] and records[1]["efficiency_score"] == 0.0
        assert records[1]["failure_reason"] == "level0_fail"
        assert records[2]["correct"] and records[2]["efficiency_score"] == 0.0
        assert records[2]["speedup"] > 0

        code = main(
            [
                "score",
                "--results", str(workspace / "results.jsonl"),
                "--k", "1,2",
                "--out", str(workspace / "report.json"),
            ]
        )
        assert code == 0
        report = json.loads((workspace / "report.json").read_text())
        assert report["per_problem"]["demo"]["pass@1"] == pytest.approx(2 / 3)
        assert 0 < report["aggregate"]["eff@1"] < 1

    def test_evaluate_resumable(self, workspace):
        calibrated = calibrate(workspace)
        evaluate(workspace, calibrated)
        first = read_results(workspace)
        evaluate(workspace, calibrated)
        assert read_results(workspace) == first  # no duplicates on rerun

    def test_empty_samples_dir_warns_and_succeeds(self, workspace):
        calibrated = calibrate(workspace)
        for f in (workspace / "samples" / "demo").iterdir():
            f.unlink()
        with pytest.warns(UserWarning, match="no samples"):
            code = evaluate(workspace, calibrated)
        assert code == 0
        assert read_results(workspace) == []

    def test_score_insufficient_samples(self, workspace):
        calibrated = calibrate(workspace)
        evaluate(workspace, calibrated)
        code = main(["score", "--results", str(workspace / "results.jsonl"), "--k", "1,10"])
        assert code == 2

    def test_binary_scores_make_eff_equal_pass(self, workspace, capsys):
        results = workspace / "binary.jsonl"
        rows = [
            {"problem_id": "p", "sample_index": i, "correct": s == 1.0,
             "level_scores": [s] * 3, "efficiency_score": s,
             "failure_reason": "none" if s else "wrong_output", "speedup": s}
            for i, s in enumerate([1.0, 0.0, 1.0, 0.0])
        ]
        results.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        code = main(["score", "--results", str(results), "--k", "1,2,4",
                     "--out", str(workspace / "rep.json")])
        assert code == 0
        report = json.loads((workspace / "rep.json").read_text())
        for k in (1, 2, 4):
            assert report["per_problem"]["p"][f"eff@{k}"] == pytest.approx(
                report["per_problem"]["p"][f"pass@{k}"], abs=1e-9
            )


class TestSelftestCommand:
    def test_selftest_passes(self, capsys):
        assert main(["selftest", "--seed", "0"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 5

    def test_seed_reproducibility(self, capsys):
        main(["selftest", "--seed", "3"])
        first = capsys.readouterr().out
        main(["selftest", "--seed", "3"])
        assert capsys.readouterr().out == first
