import sys
from pathlib import Path

import pytest

from effbench.problems import Level, OutputChecker, Problem, TestCase

TESTS_DIR = Path(__file__).parent
STUB_RUNNER_CMD = [sys.executable, str(TESTS_DIR / "stub_runner.py")]


def make_problem(
    time_limit=2.0,
    reference_times=((0.1,), (1.0, 0.5), (0.8,), (0.9,)),
    problem_id="demo",
):
    """4-level problem (level 0 + 3 scored levels) with given reference times."""
    levels = []
    for index, refs in enumerate(reference_times):
        levels.append(
            Level(
                index=index,
                hardness=0.0 if index == 0 else (3.0, 3.0, 4.0)[index - 1],
                cases=tuple(
                    TestCase(input=[index, m], expected_output=index + m, reference_time=r)
                    for m, r in enumerate(refs)
                ),
            )
        )
    return Problem(
        id=problem_id,
        prompt="compute something",
        entry_point="solve",
        levels=tuple(levels),
        time_limit=time_limit,
        output_checker=OutputChecker(mode="exact", epsilon=None),
    )


@pytest.fixture
def problem():
    return make_problem()
