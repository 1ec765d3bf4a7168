"""End-to-end acceptance criteria 1-10 at their stated tolerances and time limits.

Each test prints one PASS/FAIL line; the lines are collected again in the
"acceptance criteria" section of the pytest summary.
"""

import json

import pytest

import conftest
from firey_lab import experiments


@pytest.mark.acceptance
@pytest.mark.parametrize("k", sorted(experiments.CRITERIA))
def test_criterion(k):
    result = experiments.CRITERIA[k]()
    line = result.line()
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    for note in result.notes:
        print("note:", note)
    assert result.passed, json.dumps(result.notes)
    assert result.within_time, f"{result.runtime_s:.2f} s exceeds {result.limit_s} s"
