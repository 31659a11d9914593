"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import pytest

from kshift._backend import BACKEND
from kshift.acceptance import CRITERIA, SUITES, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print(f"\n{result.line()} [{BACKEND}]")
    assert result.passed, result.line()


def test_suites_cover_every_criterion():
    covered = sorted(n for numbers in SUITES.values() for n in numbers)
    assert covered == sorted(CRITERIA)
