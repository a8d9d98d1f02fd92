"""Every acceptance criterion at its stated tolerance, one pass/fail line each."""

import pytest

from evodich.acceptance import CRITERIA, run_one


@pytest.mark.parametrize("index", range(1, len(CRITERIA) + 1),
                         ids=[name.replace(" ", "_") for name, _ in CRITERIA])
def test_criterion(index, capsys):
    result = run_one(index)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
