"""Acceptance gate: every numbered criterion at its stated tolerance.

Run with -s (or look at the CLI `anisohardy report`) for the one-line
pass/fail summary per criterion.
"""

import pytest

from anisohardy import report


@pytest.mark.parametrize("runner", report.ALL_CRITERIA,
                         ids=[f"criterion_{i}" for i in range(1, 12)])
def test_acceptance_criterion(runner):
    result = runner()
    status = "PASS" if result.passed else "FAIL"
    print(f"[acceptance {result.cid:2d}] {status} - {result.description}")
    assert result.passed, result.details
