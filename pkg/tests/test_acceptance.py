"""Each acceptance criterion at its stated tolerance, one pass/fail line apiece.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines as they are produced.
"""
import pytest

from resfin.acceptance import CRITERIA

_lines = []


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__.removeprefix("criterion_") for c in CRITERIA])
def test_criterion(criterion):
    res = criterion()
    print(res.line())
    _lines.append(res.line())
    assert res.passed, res.detail


def teardown_module(module):
    print("\nacceptance summary")
    for line in _lines:
        print(line)
