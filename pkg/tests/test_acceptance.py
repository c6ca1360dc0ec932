"""The acceptance criteria, one test each.

Each test prints a pass/fail line; the lines are repeated in the terminal
summary.  Run standalone with ``python tests/test_acceptance.py``.
"""

import sys

import pytest

from addbases.acceptance import CRITERIA, DEFAULT_SEED, run_criteria

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"c{c.number:02d}" for c in CRITERIA])
def test_criterion(criterion):
    (result,) = run_criteria([criterion], DEFAULT_SEED)
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, result.details
    assert result.within_budget, f"took {result.seconds:.1f}s, budget {criterion.budget_s}s"


if __name__ == "__main__":
    results = run_criteria(list(CRITERIA), DEFAULT_SEED)
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed and r.within_budget for r in results) else 1)
