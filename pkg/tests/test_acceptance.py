"""One test per numbered acceptance criterion, at its stated scale.

Each prints a single PASS/FAIL line (also repeated in the terminal summary).
"""

import pytest

from qmedian.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_log, capsys):
    result = CRITERIA[number]()
    line = result.line()
    acceptance_log.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert result.passed, line
