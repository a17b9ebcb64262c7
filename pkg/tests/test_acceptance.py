"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import pytest

from rieff import validation


@pytest.mark.parametrize("criterion", validation.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
