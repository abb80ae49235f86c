"""Runs every acceptance criterion and prints one pass/fail line each.

The seeds match what ``sigspace suite --seed 7`` uses, so this module and
the CLI battery exercise identical experiments.
"""
import json

import pytest

from sigspace import acceptance

SUITE_SEED = 7

_PLAN = [
    (k, fn, SUITE_SEED + 1000 * k) for k, fn in enumerate(acceptance._CRITERIA, start=1)
]


@pytest.mark.parametrize("index,criterion,seed", _PLAN, ids=[fn.__name__ for _, fn, _ in _PLAN])
def test_acceptance_criterion(index, criterion, seed):
    result = criterion(seed)
    print(result.line())
    assert result.runtime_s < result.runtime_budget_s, (
        f"criterion {index} exceeded its runtime budget: "
        f"{result.runtime_s:.2f}s >= {result.runtime_budget_s:.2f}s"
    )
    assert result.passed, json.dumps(result.details, indent=2, default=str)
