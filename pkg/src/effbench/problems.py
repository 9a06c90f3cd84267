"""Benchmark manifest model: problems, levels, test cases, and their JSON form.

A problemset is one human-readable JSON document. Times are decimal
seconds. Expected outputs live in the manifest (captured once during
calibration from the reference solution) so evaluation never needs the
reference at score time. Level 0 carries hardness 0 and is excluded from
efficiency scoring; it exists purely as the correctness filter.

A manifest may be *uncalibrated*: ``time_limit_s`` is null and
``reference_time_s`` is 0 until the calibrate step fills them in.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

from . import valuetree


class ManifestParseError(ValueError):
    """Structurally malformed manifest (bad JSON or wrong shape)."""


class ManifestValidationError(ValueError):
    """Well-formed manifest that violates invariants; carries all of them."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class GeneratorError(RuntimeError):
    pass


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return self.code


@dataclass(frozen=True)
class OutputChecker:
    """How candidate output is compared to the expected output.

    mode is one of "exact", "float_tolerant" (with epsilon), or "custom"
    (with a command that exits 0 on match).
    """

    mode: str = "float_tolerant"
    epsilon: float | None = 1e-6
    command: tuple[str, ...] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"mode": self.mode}
        if self.mode == "float_tolerant":
            out["epsilon"] = self.epsilon
        elif self.mode == "custom":
            out["command"] = list(self.command or ())
        return out

    @staticmethod
    def from_json(obj: Any) -> "OutputChecker":
        if not isinstance(obj, dict) or "mode" not in obj:
            raise ManifestParseError(f"output_checker must be a map with a mode, got {obj!r}")
        mode = obj["mode"]
        if mode == "exact":
            return OutputChecker(mode="exact", epsilon=None)
        if mode == "float_tolerant":
            eps = obj.get("epsilon", 1e-6)
            if not isinstance(eps, (int, float)) or eps <= 0:
                raise ManifestParseError(f"float_tolerant epsilon must be > 0, got {eps!r}")
            return OutputChecker(mode="float_tolerant", epsilon=float(eps))
        if mode == "custom":
            cmd = obj.get("command")
            if not isinstance(cmd, list) or not cmd:
                raise ManifestParseError("custom checker needs a non-empty command list")
            return OutputChecker(mode="custom", epsilon=None, command=tuple(cmd))
        raise ManifestParseError(f"unknown output_checker mode {mode!r}")


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # keep pytest from collecting this dataclass

    input: Any
    expected_output: Any = None
    reference_time: float = 0.0


@dataclass(frozen=True)
class Level:
    index: int
    hardness: float
    cases: tuple[TestCase, ...]


@dataclass(frozen=True)
class Problem:
    id: str
    prompt: str
    entry_point: str
    levels: tuple[Level, ...]
    time_limit: float | None = None
    output_checker: OutputChecker = OutputChecker()

    @property
    def calibrated(self) -> bool:
        return self.time_limit is not None and all(
            c.reference_time > 0 for lvl in self.levels for c in lvl.cases
        )

    def scored_levels(self) -> tuple[Level, ...]:
        return tuple(lvl for lvl in self.levels if lvl.index >= 1)

    def level(self, index: int) -> Level:
        for lvl in self.levels:
            if lvl.index == index:
                return lvl
        raise KeyError(index)


ProblemSet = tuple[Problem, ...]


def validate_problem(problem: Problem) -> list[Violation]:
    """All invariant violations of one problem; empty iff valid. Total."""
    out: list[Violation] = []
    if not problem.id:
        out.append(Violation("empty_id", "problem id is empty"))
    if not problem.entry_point or not problem.entry_point.isidentifier():
        out.append(
            Violation(
                "bad_entry_point",
                f"entry_point {problem.entry_point!r} is not a valid identifier",
            )
        )
    indices = [lvl.index for lvl in problem.levels]
    if indices != list(range(len(indices))) or not indices:
        out.append(
            Violation(
                "non_contiguous_levels",
                f"non-contiguous levels: expected 0..L, got {indices}",
            )
        )
    if not any(i >= 1 for i in indices):
        out.append(Violation("no_scored_levels", "need at least one level with index >= 1"))
    for lvl in problem.levels:
        tag = f"level{lvl.index}"
        if not lvl.cases:
            out.append(Violation(f"empty_level@{tag}", f"{tag} has no cases"))
        if lvl.index == 0:
            if lvl.hardness != 0:
                out.append(
                    Violation(
                        f"level0_hardness_nonzero@{tag}",
                        "level 0 is the correctness filter; its hardness must be 0",
                    )
                )
        elif lvl.hardness <= 0:
            out.append(
                Violation(
                    f"hardness_nonpositive@{tag}",
                    f"{tag} hardness must be > 0, got {lvl.hardness}",
                )
            )
        for m, case in enumerate(lvl.cases):
            if case.reference_time < 0:
                out.append(
                    Violation(
                        f"negative_reference_time@{tag}.case{m}",
                        f"{tag} case {m} has negative reference time",
                    )
                )
            if not valuetree.is_value_tree(case.input) or not valuetree.is_value_tree(
                case.expected_output
            ):
                out.append(
                    Violation(
                        f"bad_value_tree@{tag}.case{m}",
                        f"{tag} case {m} holds a value outside the canonical tree",
                    )
                )
    if problem.time_limit is not None:
        if problem.time_limit <= 0:
            out.append(
                Violation("nonpositive_time_limit", f"time_limit_s must be > 0, got {problem.time_limit}")
            )
        else:
            for lvl in problem.levels:
                for m, case in enumerate(lvl.cases):
                    if case.reference_time >= problem.time_limit:
                        out.append(
                            Violation(
                                f"reference_time_exceeds_limit@level{lvl.index}.case{m}",
                                f"level {lvl.index} case {m}: reference time "
                                f"{case.reference_time} >= time limit {problem.time_limit}",
                            )
                        )
    return out


def problem_to_json(problem: Problem) -> dict[str, Any]:
    return {
        "id": problem.id,
        "prompt": problem.prompt,
        "entry_point": problem.entry_point,
        "time_limit_s": problem.time_limit,
        "output_checker": problem.output_checker.to_json(),
        "levels": [
            {
                "index": lvl.index,
                "hardness": lvl.hardness,
                "cases": [
                    {
                        "input": valuetree.canonicalize(c.input),
                        "expected_output": valuetree.canonicalize(c.expected_output),
                        "reference_time_s": c.reference_time,
                    }
                    for c in lvl.cases
                ],
            }
            for lvl in problem.levels
        ],
    }


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise ManifestParseError(f"{where}: missing field {key!r}")
    return obj[key]


def problem_from_json(obj: Any, where: str = "problem") -> Problem:
    if not isinstance(obj, dict):
        raise ManifestParseError(f"{where}: expected a map, got {type(obj).__name__}")
    levels = []
    raw_levels = _require(obj, "levels", where)
    if not isinstance(raw_levels, list):
        raise ManifestParseError(f"{where}.levels: expected a list")
    for li, raw in enumerate(raw_levels):
        lwhere = f"{where}.levels[{li}]"
        if not isinstance(raw, dict):
            raise ManifestParseError(f"{lwhere}: expected a map")
        cases = []
        for ci, rc in enumerate(_require(raw, "cases", lwhere)):
            cwhere = f"{lwhere}.cases[{ci}]"
            if not isinstance(rc, dict):
                raise ManifestParseError(f"{cwhere}: expected a map")
            cases.append(
                TestCase(
                    input=_require(rc, "input", cwhere),
                    expected_output=rc.get("expected_output"),
                    reference_time=float(rc.get("reference_time_s", 0.0)),
                )
            )
        levels.append(
            Level(
                index=int(_require(raw, "index", lwhere)),
                hardness=float(_require(raw, "hardness", lwhere)),
                cases=tuple(cases),
            )
        )
    raw_limit = obj.get("time_limit_s")
    return Problem(
        id=str(_require(obj, "id", where)),
        prompt=str(_require(obj, "prompt", where)),
        entry_point=str(_require(obj, "entry_point", where)),
        levels=tuple(levels),
        time_limit=None if raw_limit is None else float(raw_limit),
        output_checker=OutputChecker.from_json(obj.get("output_checker", {"mode": "float_tolerant"})),
    )


def parse_problemset_text(text: str, source: str = "<string>") -> ProblemSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "problems" not in doc:
        raise ManifestParseError(f"{source}: document must be a map with a 'problems' list")
    problems = [
        problem_from_json(raw, where=f"{source}.problems[{i}]")
        for i, raw in enumerate(doc["problems"])
    ]
    violations: list[Violation] = []
    for p in problems:
        violations.extend(
            Violation(f"{v.code}#problem={p.id}", f"problem {p.id}: {v.message}")
            for v in validate_problem(p)
        )
    ids = [p.id for p in problems]
    if len(set(ids)) != len(ids):
        violations.append(Violation("duplicate_problem_ids", f"duplicate ids in {ids}"))
    if violations:
        raise ManifestValidationError(violations)
    return tuple(sorted(problems, key=lambda p: p.id))


def parse_problemset(path: str | Path) -> ProblemSet:
    """Parse and validate a problemset manifest; problems come back sorted by id."""
    path = Path(path)
    return parse_problemset_text(path.read_text(encoding="utf-8"), source=str(path))


def serialize_problemset(problems: Sequence[Problem]) -> str:
    """Byte-stable JSON text for a problemset (fixed key order, sorted by id)."""
    doc = {"problems": [problem_to_json(p) for p in sorted(problems, key=lambda p: p.id)]}
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def write_problemset(problems: Sequence[Problem], path: str | Path) -> None:
    Path(path).write_text(serialize_problemset(problems), encoding="utf-8")


@dataclass(frozen=True)
class CodeSample:
    """One candidate solution for a problem."""

    problem_id: str
    sample_index: int
    source: str
    origin: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.source:
            raise ValueError("candidate source is empty")


def import_generated_cases(
    problem: Problem,
    generator_command: Sequence[str],
    seed: int,
    timeout: float = 60.0,
) -> Problem:
    """Append generator-emitted cases to the problem.

    The generator is run with the seed appended as its last argument and
    must emit one JSON record per line: {"level": <index>, "input": <tree>}.
    New cases carry reference_time 0 pending calibration. Deterministic for
    a fixed (problem, command, seed).
    """
    cmd = [*generator_command, str(seed)]
    try:
        proc = subprocess.run(
            cmd, capture_output=True, text=True, timeout=timeout, check=False
        )
    except OSError as exc:
        raise GeneratorError(f"cannot run generator {cmd}: {exc}") from exc
    if proc.returncode != 0:
        raise GeneratorError(
            f"generator exited with {proc.returncode}; stderr:\n{proc.stderr}"
        )
    new_cases: dict[int, list[TestCase]] = {}
    lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
    if not lines:
        raise GeneratorError("no cases emitted")
    for ln in lines:
        try:
            rec = json.loads(ln)
        except json.JSONDecodeError as exc:
            raise GeneratorError(f"malformed case record {ln!r}: {exc}") from exc
        if not isinstance(rec, dict) or "level" not in rec or "input" not in rec:
            raise GeneratorError(f"case record needs 'level' and 'input': {ln!r}")
        level_index = int(rec["level"])
        if level_index not in {lvl.index for lvl in problem.levels}:
            raise GeneratorError(f"record targets unknown level {level_index}")
        new_cases.setdefault(level_index, []).append(
            TestCase(
                input=valuetree.canonicalize(rec["input"]),
                expected_output=valuetree.canonicalize(rec.get("expected_output")),
                reference_time=0.0,
            )
        )
    levels = tuple(
        replace(lvl, cases=lvl.cases + tuple(new_cases.get(lvl.index, [])))
        for lvl in problem.levels
    )
    return replace(problem, levels=levels)
