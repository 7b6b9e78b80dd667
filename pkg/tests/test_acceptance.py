"""Acceptance suite: one test per criterion, each printing its pass/fail line.

Tolerances are pinned inside ``affinebody.acceptance``; this module only
executes and reports.
"""

import json

import pytest

from affinebody import acceptance


@pytest.mark.parametrize(
    "criterion", acceptance.CRITERIA, ids=[f.__name__ for f in acceptance.CRITERIA]
)
def test_criterion(criterion):
    result = criterion()
    status = "PASS" if result["passed"] else "FAIL"
    print(
        f"\n[{status}] criterion {result['criterion']:2d}: {result['name']} "
        f"({result['runtime_s']:.1f} s)"
    )
    assert result["passed"], json.dumps(result["details"], indent=2, default=str)
