"""The twelve acceptance criteria at their stated tolerances.

Each case prints one PASS/FAIL line.  Run only these with
``pytest tests/test_acceptance.py -s``; skip them with ``-m "not slow"``.
"""
import pytest

from skewspec.verification import ACCEPTANCE

RESULTS = []


@pytest.mark.slow
@pytest.mark.parametrize("check", ACCEPTANCE, ids=[fn.__name__ for fn in ACCEPTANCE])
def test_acceptance(check):
    result = check()
    RESULTS.append(result.line())
    print(result.line())
    assert result.passed, result.line()
