"""Acceptance criteria 1-9, one PASS/FAIL line each.

Each criterion runs under its runtime budget; details are printed for
failures.  The lines are written to the terminal even under capture.
"""

import pytest

from gdft.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_acceptance_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print()
        print(result.line())
        if not result.passed:
            for d in result.details:
                print(f"    {d}")
    assert result.passed, "\n".join(result.details)
