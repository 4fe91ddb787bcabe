"""Acceptance criteria at their target settings.

Set TRUNCSPARSE_ACCEPTANCE=quick for the reduced suite. Each test prints a
single PASS/FAIL line straight to the terminal.
"""

import os

import pytest

from truncsparse.acceptance import CRITERIA

QUICK = os.environ.get("TRUNCSPARSE_ACCEPTANCE", "full") == "quick"


@pytest.mark.slow
@pytest.mark.parametrize("number,check", list(enumerate(CRITERIA, start=1)),
                         ids=[fn.__name__ for fn in CRITERIA])
def test_criterion(number, check, capsys):
    result = check(quick=QUICK)
    with capsys.disabled():
        print(f"\n{result.line()} {result.detail}")
    assert result.number == number
    assert result.passed, result.detail
