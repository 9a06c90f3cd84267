"""Evaluation orchestration: job dispatch, hard-kill supervision, progression.

The harness never runs candidate code in-process. Each (sample, level)
pair becomes one job handed to a runner — an external process speaking
the runner protocol — which amortizes interpreter startup while bounding
the blast radius of a hang to one level. The runner enforces the per-case
soft limit (that is what implements censoring precisely); the harness
enforces a hard overall budget as the safety net and converts a hard kill
into censored timeout records for every unreported case.

Runner protocol: the job is written as one JSON document to a file passed
as the runner's first argument; the runner emits one record per line on
stdout; exit code 0 means protocol success even if the candidate failed.
"""

from __future__ import annotations

import json
import logging
import os
import resource
import signal
import subprocess
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Protocol, Sequence

from . import valuetree
from .problems import CodeSample, OutputChecker, Problem, TestCase
from .scoring import (
    FailureReason,
    LevelOutcome,
    Progression,
    SampleEvaluation,
    level_progression,
    level_score,
    sample_score,
)
from .timing import CensoredTime, HarnessConfig, compute_time_limit, hodges_lehmann

log = logging.getLogger(__name__)

RECORD_STATUSES = ("ok", "wrong_output", "timeout", "runtime_error")


class HarnessError(RuntimeError):
    """Fatal harness-side failure (protocol violation, unkillable worker)."""


class ReferenceMeasurementError(RuntimeError):
    """Benchmark-authoring failure while measuring the reference solution."""


@dataclass(frozen=True)
class RunnerJob:
    job_id: str
    candidate_source: str
    entry_point: str
    cases: tuple[tuple[str, Any], ...]  # (case_id, input)
    soft_limit: float
    repeats: int
    checker: OutputChecker
    expected_outputs: tuple[Any, ...] | None = None
    capture_output: bool = False

    def __post_init__(self):
        if self.soft_limit <= 0:
            raise ValueError(f"soft_limit must be > 0, got {self.soft_limit}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.expected_outputs is not None and len(self.expected_outputs) != len(self.cases):
            raise ValueError("expected_outputs length must match cases")

    def budget(self, margin: float) -> float:
        return len(self.cases) * self.repeats * self.soft_limit + margin

    def to_json(self) -> dict[str, Any]:
        cases = []
        for i, (case_id, value) in enumerate(self.cases):
            entry: dict[str, Any] = {"case_id": case_id, "input": valuetree.canonicalize(value)}
            if self.expected_outputs is not None:
                entry["expected_output"] = valuetree.canonicalize(self.expected_outputs[i])
            cases.append(entry)
        return {
            "job_id": self.job_id,
            "candidate_source": self.candidate_source,
            "entry_point": self.entry_point,
            "soft_limit_s": self.soft_limit,
            "repeats": self.repeats,
            "checker": self.checker.to_json(),
            "capture_output": self.capture_output,
            "cases": cases,
        }


@dataclass(frozen=True)
class RunnerRecord:
    case_id: str
    status: str
    timings: tuple[float, ...] = ()
    diagnostics: str = ""
    output: Any = None

    def __post_init__(self):
        if self.status not in RECORD_STATUSES:
            raise ValueError(f"unknown record status {self.status!r}")

    @staticmethod
    def from_json(obj: Any) -> "RunnerRecord":
        if not isinstance(obj, dict):
            raise HarnessError(f"runner record must be a map, got {obj!r}")
        try:
            return RunnerRecord(
                case_id=str(obj["case_id"]),
                status=str(obj["status"]),
                timings=tuple(float(t) for t in obj.get("timings_s", [])),
                diagnostics=str(obj.get("diagnostics", "")),
                output=obj.get("output"),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise HarnessError(f"malformed runner record {obj!r}: {exc}") from exc


class Runner(Protocol):
    def run(self, job: RunnerJob) -> list[RunnerRecord]: ...


def _timeout_record(case_id: str, soft_limit: float, diagnostics: str) -> RunnerRecord:
    return RunnerRecord(
        case_id=case_id,
        status="timeout",
        timings=(soft_limit,),
        diagnostics=diagnostics,
    )


@dataclass
class SubprocessRunner:
    """Dispatches jobs to an external runner process and supervises it.

    The worker gets a temp working directory and is killed (whole process
    group) if it exceeds cases * repeats * soft_limit + hard_kill_margin.
    A hard kill yields censored timeout records for all unreported cases;
    any nonzero exit is a protocol failure.
    """

    command: Sequence[str]
    hard_kill_margin: float = 10.0
    memory_limit_bytes: int | None = None

    def run(self, job: RunnerJob) -> list[RunnerRecord]:
        budget = job.budget(self.hard_kill_margin)
        with tempfile.TemporaryDirectory(prefix="effbench-job-") as tmp:
            job_file = Path(tmp) / "job.json"
            job_file.write_text(json.dumps(job.to_json(), ensure_ascii=False), encoding="utf-8")
            killed = False
            proc = subprocess.Popen(
                [*self.command, str(job_file)],
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                cwd=tmp,
                start_new_session=True,
                preexec_fn=self._limit_resources,
            )
            try:
                stdout, stderr = proc.communicate(timeout=budget)
            except subprocess.TimeoutExpired:
                killed = True
                stdout, stderr = self._hard_kill(proc, job.job_id)
        records = self._parse_records(stdout)
        if not killed and proc.returncode != 0:
            raise HarnessError(
                f"runner protocol failure for job {job.job_id}: "
                f"exit {proc.returncode}; stderr:\n{stderr[-2000:]}"
            )
        by_id = {r.case_id: r for r in records}
        out = []
        for case_id, _ in job.cases:
            if case_id in by_id:
                out.append(by_id[case_id])
            else:
                out.append(_timeout_record(case_id, job.soft_limit, "hard-killed before report"))
        return out

    def _limit_resources(self):
        if self.memory_limit_bytes is not None:
            resource.setrlimit(
                resource.RLIMIT_AS, (self.memory_limit_bytes, self.memory_limit_bytes)
            )

    def _hard_kill(self, proc: subprocess.Popen, job_id: str) -> tuple[str, str]:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        try:
            stdout, stderr = proc.communicate(timeout=10.0)
        except subprocess.TimeoutExpired as exc:
            raise HarnessError(f"worker for job {job_id} survived SIGKILL (zombie)") from exc
        return stdout or "", stderr or ""

    @staticmethod
    def _parse_records(stdout: str) -> list[RunnerRecord]:
        records = []
        for line in stdout.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                # a hard kill can truncate the final line mid-record
                log.debug("dropping truncated runner line: %r", line[:200])
                continue
            records.append(RunnerRecord.from_json(obj))
        return records


def _reduce_case(
    record: RunnerRecord,
    soft_limit: float,
    repeats: int,
    calibration_ratio: float,
) -> CensoredTime:
    """Per-case time: Hodges-Lehmann over repeats, then machine calibration.

    Censored cases bypass both. Any calibrated value at or beyond the
    limit is clamped to a censored entry so a non-censored time never
    reaches the time limit.
    """
    if record.status == "timeout":
        return CensoredTime(soft_limit, censored=True)
    timings = record.timings[:repeats] if record.timings else (soft_limit,)
    value = hodges_lehmann(timings) * calibration_ratio
    if value >= soft_limit:
        return CensoredTime(soft_limit, censored=True)
    return CensoredTime(value, censored=False)


def _level_job(
    problem: Problem,
    sample: CodeSample,
    level_index: int,
    cases: Sequence[TestCase],
    config: HarnessConfig,
) -> RunnerJob:
    return RunnerJob(
        job_id=f"{problem.id}/{sample.sample_index}/L{level_index}",
        candidate_source=sample.source,
        entry_point=problem.entry_point,
        cases=tuple((f"L{level_index}.{m}", c.input) for m, c in enumerate(cases)),
        soft_limit=problem.time_limit,
        repeats=config.repeats,
        checker=problem.output_checker,
        expected_outputs=tuple(c.expected_output for c in cases),
    )


def evaluate_sample(
    problem: Problem,
    sample: CodeSample,
    config: HarnessConfig,
    runner: Runner,
    calibration_ratio: float = 1.0,
) -> SampleEvaluation:
    evaluation, _ = evaluate_sample_detailed(
        problem, sample, config, runner, calibration_ratio
    )
    return evaluation


def evaluate_sample_detailed(
    problem: Problem,
    sample: CodeSample,
    config: HarnessConfig,
    runner: Runner,
    calibration_ratio: float = 1.0,
) -> tuple[SampleEvaluation, list[LevelOutcome]]:
    """Run one candidate through level 0 and then levels 1..L in order.

    Level 0 decides correctness only. A timeout at a level >= 1 stops
    execution of the remaining levels (they score 0) but keeps the sample
    correct; wrong output or a runtime error anywhere makes it incorrect.
    """
    if not problem.calibrated:
        raise HarnessError(f"problem {problem.id} is not calibrated")
    outcomes: list[LevelOutcome] = []
    failure = FailureReason.NONE
    for lvl in problem.levels:
        verdict = level_progression(outcomes)
        if verdict is not Progression.CONTINUE:
            outcomes.append(LevelOutcome(level_index=lvl.index, executed=False))
            continue
        records = runner.run(_level_job(problem, sample, lvl.index, lvl.cases, config))
        times = []
        wrong = False
        runtime_error = False
        for rec in records:
            if rec.status == "wrong_output":
                wrong = True
                break
            if rec.status == "runtime_error":
                runtime_error = True
                break
            times.append(
                _reduce_case(rec, problem.time_limit, config.repeats, calibration_ratio)
            )
            if times[-1].censored:
                # remaining cases in the level cannot change the (max-based)
                # level score, and deeper levels only grow the input scale
                break
        outcomes.append(
            LevelOutcome(
                level_index=lvl.index,
                case_times=tuple(times),
                outputs_correct=not wrong,
                executed=True,
                runtime_error=runtime_error,
            )
        )
        if runtime_error:
            failure = FailureReason.RUNTIME_ERROR
        elif wrong or (outcomes[-1].timed_out and lvl.index == 0):
            failure = FailureReason.LEVEL0_FAIL if lvl.index == 0 else FailureReason.WRONG_OUTPUT
    verdict = level_progression(outcomes)
    correct = verdict is not Progression.STOP_INCORRECT
    scored = problem.scored_levels()
    by_index = {o.level_index: o for o in outcomes}
    level_scores = []
    for lvl in scored:
        outcome = by_index.get(lvl.index)
        if (
            not correct
            or outcome is None
            or not outcome.executed
            or outcome.timed_out
            or not outcome.case_times
        ):
            level_scores.append(0.0)
            continue
        worst = max(outcome.case_times, key=lambda t: t.value)
        worst_ref = max(c.reference_time for c in lvl.cases)
        level_scores.append(level_score(worst, worst_ref, problem.time_limit))
    evaluation = SampleEvaluation(
        problem_id=problem.id,
        sample_index=sample.sample_index,
        correct=correct,
        level_scores=tuple(level_scores if correct else [0.0] * len(scored)),
        efficiency_score=sample_score(
            level_scores, [lvl.hardness for lvl in scored], correct
        ),
        failure_reason=failure if not correct else FailureReason.NONE,
    )
    return evaluation, outcomes


def sample_speedup(problem: Problem, outcomes: Sequence[LevelOutcome]) -> float:
    """Classic speedup baseline for one evaluated sample.

    Cases never measured (skipped levels, cases after an in-level
    censor) are treated as censored at the limit, so they contribute
    t*/T — the overestimation this baseline is known for.
    """
    from .metrics import speedup_at_1

    by_index = {o.level_index: o for o in outcomes}
    case_times: list[list[CensoredTime]] = []
    reference_times: list[list[float]] = []
    hardness: list[float] = []
    limit = problem.time_limit
    for lvl in problem.scored_levels():
        outcome = by_index.get(lvl.index)
        measured = list(outcome.case_times) if outcome and outcome.executed else []
        padded = [
            measured[m] if m < len(measured) else CensoredTime(limit, censored=True)
            for m in range(len(lvl.cases))
        ]
        case_times.append(padded)
        reference_times.append([c.reference_time for c in lvl.cases])
        hardness.append(lvl.hardness)
    return speedup_at_1(case_times, reference_times, limit, hardness)


def measure_reference(
    problem: Problem,
    reference_source: str,
    config: HarnessConfig,
    runner: Runner,
) -> Problem:
    """Time the reference solution and calibrate the problem.

    Each case's reference time is the Hodges-Lehmann estimate over the
    configured repeats; expected outputs are captured from the reference
    run; the time limit is timeout_factor times the slowest case. The
    reference runs under a sanity ceiling — a reference that times out or
    produces nondeterministic output is a benchmark-authoring error.
    """
    new_levels = []
    for lvl in problem.levels:
        job = RunnerJob(
            job_id=f"{problem.id}/reference/L{lvl.index}",
            candidate_source=reference_source,
            entry_point=problem.entry_point,
            cases=tuple((f"L{lvl.index}.{m}", c.input) for m, c in enumerate(lvl.cases)),
            soft_limit=config.reference_ceiling,
            repeats=config.repeats,
            checker=problem.output_checker,
            capture_output=True,
        )
        records = runner.run(job)
        new_cases = []
        for case, rec in zip(lvl.cases, records):
            if rec.status == "timeout":
                raise ReferenceMeasurementError(
                    f"reference for {problem.id} exceeded the sanity ceiling "
                    f"({config.reference_ceiling}s) at level {lvl.index}"
                )
            if rec.status != "ok":
                raise ReferenceMeasurementError(
                    f"reference for {problem.id} failed at level {lvl.index}: "
                    f"{rec.status}: {rec.diagnostics}"
                )
            new_cases.append(
                replace(
                    case,
                    reference_time=hodges_lehmann(rec.timings),
                    expected_output=valuetree.canonicalize(rec.output),
                )
            )
        new_levels.append(replace(lvl, cases=tuple(new_cases)))
    all_refs = [c.reference_time for lvl in new_levels for c in lvl.cases]
    limit = compute_time_limit(all_refs, config.timeout_factor)
    return replace(problem, levels=tuple(new_levels), time_limit=limit)


def measure_calibration_ratio(
    problem: Problem,
    reference_source: str,
    config: HarnessConfig,
    runner: Runner,
) -> float:
    """stored / fresh timing ratio from one probe of the slowest test case."""
    slowest_level, slowest_case = max(
        (
            (lvl, case)
            for lvl in problem.levels
            for case in lvl.cases
        ),
        key=lambda pair: pair[1].reference_time,
    )
    stored = slowest_case.reference_time
    if stored <= 0:
        raise HarnessError(f"problem {problem.id} has no stored reference times")
    job = RunnerJob(
        job_id=f"{problem.id}/calibration-probe",
        candidate_source=reference_source,
        entry_point=problem.entry_point,
        cases=((f"L{slowest_level.index}.probe", slowest_case.input),),
        soft_limit=config.reference_ceiling,
        repeats=config.repeats,
        checker=problem.output_checker,
    )
    records = runner.run(job)
    if not records or records[0].status != "ok":
        raise HarnessError(
            f"calibration probe failed for {problem.id}: "
            f"{records[0].status if records else 'no record'}"
        )
    fresh = hodges_lehmann(records[0].timings)
    return stored / fresh
