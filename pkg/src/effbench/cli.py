"""Command-line driver: calibrate, evaluate, score, selftest.

Results are line-delimited JSON records so interrupted runs stay
salvageable; evaluate skips (problem, sample) pairs already present in
the output file. Exit codes: 0 success, 1 candidate-level failures were
recorded, 2 configuration or validation error, 3 fatal harness error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import selftest as selftest_mod
from .harness import (
    HarnessError,
    ReferenceMeasurementError,
    SubprocessRunner,
    evaluate_sample_detailed,
    measure_calibration_ratio,
    measure_reference,
    sample_speedup,
)
from .metrics import MetricError, ProblemSamples, aggregate_report
from .problems import (
    CodeSample,
    ManifestParseError,
    ManifestValidationError,
    parse_problemset,
    write_problemset,
)
from .scoring import SampleEvaluation, FailureReason
from .timing import HarnessConfig, TimingError

EXIT_OK = 0
EXIT_RECORDED_FAILURES = 1
EXIT_CONFIG = 2
EXIT_FATAL = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _config_from_args(args) -> HarnessConfig:
    kwargs = {}
    if args.alpha is not None:
        kwargs["timeout_factor"] = args.alpha
    if args.repeats is not None:
        kwargs["repeats"] = args.repeats
    if args.hardness is not None:
        kwargs["hardness_weights"] = tuple(float(h) for h in args.hardness.split(","))
    try:
        return HarnessConfig(**kwargs)
    except TimingError as exc:
        raise CliError(f"bad configuration: {exc}") from exc


def _runner_from_args(args, config: HarnessConfig) -> SubprocessRunner:
    if not args.runner:
        raise CliError("--runner is required (command that speaks the runner protocol)")
    return SubprocessRunner(
        command=shlex.split(args.runner),
        hard_kill_margin=config.hard_kill_margin,
    )


def _load_problemset(path: str):
    try:
        return parse_problemset(path)
    except (ManifestParseError, ManifestValidationError, OSError) as exc:
        raise CliError(f"cannot load problemset {path}: {exc}") from exc


def _reference_source(references: Path, problem_id: str) -> str:
    matches = sorted(references.glob(f"{problem_id}.*")) + sorted(
        references.glob(f"{problem_id}/*")
    )
    if not matches:
        raise CliError(f"no reference solution for problem {problem_id!r} in {references}")
    return matches[0].read_text(encoding="utf-8")


def cmd_calibrate(args) -> int:
    config = _config_from_args(args)
    runner = _runner_from_args(args, config)
    problems = _load_problemset(args.problemset)
    references = Path(args.references)
    sources = {p.id: _reference_source(references, p.id) for p in problems}
    calibrated = []
    for problem in problems:
        try:
            result = measure_reference(problem, sources[problem.id], config, runner)
        except (ReferenceMeasurementError, HarnessError) as exc:
            print(f"calibration failed for problem {problem.id}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        calibrated.append(result)
        print(f"{result.id}: time_limit={result.time_limit:.6f}s")
    write_problemset(calibrated, args.out)
    print(f"wrote calibrated manifest to {args.out}")
    return EXIT_OK


def _evaluation_to_json(evaluation: SampleEvaluation, speedup: float) -> dict:
    return {
        "problem_id": evaluation.problem_id,
        "sample_index": evaluation.sample_index,
        "correct": evaluation.correct,
        "level_scores": list(evaluation.level_scores),
        "efficiency_score": evaluation.efficiency_score,
        "failure_reason": evaluation.failure_reason.value,
        "speedup": speedup,
    }


def _discover_samples(samples_dir: Path, problem_ids: set[str]) -> list[CodeSample]:
    samples = []
    for problem_dir in sorted(p for p in samples_dir.iterdir() if p.is_dir()):
        if problem_dir.name not in problem_ids:
            warnings.warn(f"samples for unknown problem {problem_dir.name!r} ignored")
            continue
        for path in sorted(problem_dir.iterdir()):
            if not path.is_file():
                continue
            try:
                index = int(path.stem)
            except ValueError:
                warnings.warn(f"sample file {path} is not named <sample_index>; ignored")
                continue
            samples.append(
                CodeSample(
                    problem_id=problem_dir.name,
                    sample_index=index,
                    source=path.read_text(encoding="utf-8"),
                    origin={"path": str(path)},
                )
            )
    return samples


def cmd_evaluate(args) -> int:
    config = _config_from_args(args)
    runner = _runner_from_args(args, config)
    problems = {p.id: p for p in _load_problemset(args.problemset)}
    for problem in problems.values():
        if not problem.calibrated:
            raise CliError(f"problem {problem.id} is not calibrated; run calibrate first")
    samples_dir = Path(args.samples)
    if not samples_dir.is_dir():
        raise CliError(f"samples directory {samples_dir} does not exist")
    samples = _discover_samples(samples_dir, set(problems))
    out_path = Path(args.out)
    done: set[tuple[str, int]] = set()
    if out_path.exists():
        for line in out_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                rec = json.loads(line)
                done.add((rec["problem_id"], rec["sample_index"]))
    todo = [s for s in samples if (s.problem_id, s.sample_index) not in done]
    if not samples:
        warnings.warn("no samples found; writing empty results file")
        out_path.touch()
        return EXIT_OK
    ratios = {pid: 1.0 for pid in problems}
    if args.references:
        references = Path(args.references)
        for pid, problem in problems.items():
            if any(s.problem_id == pid for s in todo):
                ratios[pid] = measure_calibration_ratio(
                    problem, _reference_source(references, pid), config, runner
                )
                print(f"{pid}: machine calibration ratio {ratios[pid]:.3f}")

    def evaluate_one(sample: CodeSample):
        problem = problems[sample.problem_id]
        evaluation, outcomes = evaluate_sample_detailed(
            problem, sample, config, runner, calibration_ratio=ratios[sample.problem_id]
        )
        return evaluation, sample_speedup(problem, outcomes)

    any_failure = False
    try:
        with out_path.open("a", encoding="utf-8") as out:
            if args.parallel and args.parallel > 1:
                warnings.warn(
                    "parallel evaluation degrades timing quality; "
                    "use only for smoke runs"
                )
                with ThreadPoolExecutor(max_workers=args.parallel) as pool:
                    results = list(pool.map(evaluate_one, todo))
            else:
                results = map(evaluate_one, todo)
            for evaluation, speedup in results:
                if not evaluation.correct:
                    any_failure = True
                out.write(json.dumps(_evaluation_to_json(evaluation, speedup)) + "\n")
                out.flush()
                print(
                    f"{evaluation.problem_id}/{evaluation.sample_index}: "
                    f"e={evaluation.efficiency_score:.4f} correct={evaluation.correct} "
                    f"({evaluation.failure_reason.value})"
                )
    except HarnessError as exc:
        print(f"fatal harness error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    return EXIT_RECORDED_FAILURES if any_failure else EXIT_OK


def load_results(path: str | Path) -> dict[str, list[dict]]:
    by_problem: dict[str, list[dict]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            by_problem.setdefault(rec["problem_id"], []).append(rec)
    return by_problem


def cmd_score(args) -> int:
    ks = [int(k) for k in args.k.split(",")]
    by_problem = load_results(args.results)
    if not by_problem:
        raise CliError(f"no evaluation records in {args.results}")
    per_problem = {}
    speedups = {}
    for pid, records in by_problem.items():
        per_problem[pid] = ProblemSamples(
            scores=tuple(r["efficiency_score"] for r in records),
            num_correct=sum(1 for r in records if r["correct"]),
        )
        speedups[pid] = sum(r.get("speedup", 0.0) for r in records) / len(records)
    try:
        report = aggregate_report(per_problem, ks, speedups=speedups)
    except MetricError as exc:
        raise CliError(str(exc)) from exc
    columns = [f"eff@{k}" for k in ks for _ in (0,)]
    header = ["problem", "n"]
    for k in ks:
        header += [f"eff@{k}", f"pass@{k}"]
    header.append("speedup@1*")
    rows = []
    for pid, row in report.per_problem.items():
        cells = [pid, str(report.n_samples[pid])]
        for k in ks:
            cells += [f"{row[f'eff@{k}']:.4f}", f"{row[f'pass@{k}']:.4f}"]
        cells.append(f"{row.get('speedup@1', float('nan')):.4f}")
        rows.append(cells)
    agg_cells = ["AGGREGATE", ""]
    for k in ks:
        agg_cells += [
            f"{report.aggregate[f'eff@{k}']:.4f}",
            f"{report.aggregate[f'pass@{k}']:.4f}",
        ]
    agg_cells.append(f"{report.aggregate.get('speedup@1', float('nan')):.4f}")
    rows.append(agg_cells)
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for cells in rows:
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    print("* speedup overestimates efficiency under censoring; diagnostic only")
    if args.out:
        doc = {
            "per_problem": report.per_problem,
            "aggregate": report.aggregate,
            "n_samples": report.n_samples,
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote report to {args.out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = selftest_mod.run_all(seed=args.seed)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.detail}")
        failed = failed or not r.passed
    return EXIT_RECORDED_FAILURES if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effbench",
        description="Code-efficiency evaluation harness (censoring-aware eff@k)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="measure reference timings and set time limits")
    cal.add_argument("--problemset", required=True)
    cal.add_argument("--references", required=True, help="dir with <problem_id>.<ext> sources")
    cal.add_argument("--runner", required=True, help="runner command, e.g. 'node runner/main.js'")
    cal.add_argument("--out", required=True)
    cal.add_argument("--alpha", type=float, default=None)
    cal.add_argument("--repeats", type=int, default=None)
    cal.add_argument("--hardness", default=None)
    cal.set_defaults(func=cmd_calibrate)

    ev = sub.add_parser("evaluate", help="evaluate candidate samples against a calibrated manifest")
    ev.add_argument("--problemset", required=True)
    ev.add_argument("--samples", required=True, help="dir of <problem_id>/<sample_index>.<ext>")
    ev.add_argument("--runner", required=True)
    ev.add_argument("--out", required=True)
    ev.add_argument("--references", default=None, help="enable machine calibration probes")
    ev.add_argument("--alpha", type=float, default=None)
    ev.add_argument("--repeats", type=int, default=None)
    ev.add_argument("--hardness", default=None)
    ev.add_argument("--parallel", type=int, default=1)
    ev.set_defaults(func=cmd_evaluate)

    sc = sub.add_parser("score", help="compute eff@k / pass@k report from results")
    sc.add_argument("--results", required=True)
    sc.add_argument("--k", default="1,10,100")
    sc.add_argument("--out", default=None)
    sc.set_defaults(func=cmd_score)

    st = sub.add_parser("selftest", help="run the statistical property suites")
    st.add_argument("--seed", type=int, default=0)
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
