"""Acceptance gate: one PASS/FAIL line per criterion at the published tolerances.

Run directly (``python tests/test_acceptance.py``) or through pytest; either
way each criterion prints a single line.  ``biratlab verify`` runs the same
checks.
"""
import sys

import pytest

from biratlab import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, acceptance_log):
    result = acceptance.run(number)
    print(result.line())
    acceptance_log.append(result.line())
    assert result.passed, result.detail


if __name__ == "__main__":
    results = acceptance.run_all()
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
