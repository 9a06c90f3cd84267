"""Per-level efficiency scores, level progression, and the sample score.

A level's score compares the candidate's worst-case time against the
reference's worst case under the shared time limit T:

    f = (T - t)^+ / (T - t*)

where t is the candidate's slowest case and t* the reference's slowest
case at that level. Censored runs score exactly 0 no matter how far past
T the true time is, and the score may exceed 1 when the candidate beats
the reference.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .timing import CensoredTime


class ScoringError(ValueError):
    pass


class Progression(enum.Enum):
    CONTINUE = "continue"
    STOP_TIMEOUT = "stop_timeout"
    STOP_INCORRECT = "stop_incorrect"


class FailureReason(enum.Enum):
    NONE = "none"
    WRONG_OUTPUT = "wrong_output"
    LEVEL0_FAIL = "level0_fail"
    RUNTIME_ERROR = "runtime_error"


@dataclass(frozen=True)
class LevelOutcome:
    """What happened at one level: per-case times, correctness, whether it ran.

    A level skipped by the progression rule has executed=False and no
    case times. A level with any censored case counts as timed out.
    """

    level_index: int
    case_times: tuple[CensoredTime, ...] = ()
    outputs_correct: bool = True
    executed: bool = True
    runtime_error: bool = False

    def __post_init__(self):
        if not self.executed and self.case_times:
            raise ScoringError("skipped level cannot carry case times")

    @property
    def timed_out(self) -> bool:
        return any(t.censored for t in self.case_times)


@dataclass(frozen=True)
class SampleEvaluation:
    """Final verdict for one code sample.

    An incorrect sample has efficiency_score 0 and all level scores 0;
    a correct sample's efficiency_score is the hardness-weighted mean of
    its level scores.
    """

    problem_id: str
    sample_index: int
    correct: bool
    level_scores: tuple[float, ...]
    efficiency_score: float
    failure_reason: FailureReason = FailureReason.NONE

    def __post_init__(self):
        if not self.correct:
            if self.efficiency_score != 0 or any(f != 0 for f in self.level_scores):
                raise ScoringError("incorrect sample must score 0 everywhere")


def level_score(
    worst_case_time: CensoredTime,
    worst_reference_time: float,
    time_limit: float,
) -> float:
    """(T - t)^+ / (T - t*), with censored t scoring exactly 0."""
    if worst_reference_time >= time_limit:
        raise ScoringError(
            f"reference time {worst_reference_time} must be below the "
            f"time limit {time_limit}"
        )
    if worst_case_time.censored:
        return 0.0
    headroom = time_limit - worst_case_time.value
    if headroom <= 0:
        return 0.0
    return headroom / (time_limit - worst_reference_time)


def level_progression(outcomes_so_far: Sequence[LevelOutcome]) -> Progression:
    """Decide whether evaluation continues past the levels seen so far.

    Wrong output at any executed level (or a timeout at level 0, which on
    tiny inputs means a pathological sample) stops evaluation and marks
    the sample incorrect. A timeout at a level >= 1 stops evaluation but
    the sample stays correct: the skipped levels just score 0.
    """
    expected = 0
    for outcome in outcomes_so_far:
        if outcome.level_index != expected:
            raise ScoringError(
                f"outcomes out of order: expected level {expected}, "
                f"got {outcome.level_index}"
            )
        expected += 1
    for outcome in outcomes_so_far:
        if not outcome.executed:
            continue
        if outcome.runtime_error or not outcome.outputs_correct:
            return Progression.STOP_INCORRECT
        if outcome.timed_out:
            if outcome.level_index == 0:
                return Progression.STOP_INCORRECT
            return Progression.STOP_TIMEOUT
    return Progression.CONTINUE


def sample_score(
    level_scores: Sequence[float],
    hardness: Sequence[float],
    correct: bool,
) -> float:
    """Hardness-weighted mean of level scores; 0 for an incorrect sample."""
    if len(level_scores) != len(hardness):
        raise ScoringError(
            f"got {len(level_scores)} level scores but {len(hardness)} weights"
        )
    if any(h <= 0 for h in hardness):
        raise ScoringError("hardness weights must be positive")
    if not correct:
        return 0.0
    if not level_scores:
        raise ScoringError("no level scores")
    return math.fsum(h * f for h, f in zip(hardness, level_scores)) / math.fsum(hardness)
