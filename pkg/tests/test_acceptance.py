"""Acceptance battery: one test per certification criterion.

Each test prints a single ``PASS``/``FAIL`` line with the criterion's key
figures and asserts the criterion's own verdict.  The shared context reuses
curve, period and Riemann-constant computations across criteria.
"""

import json

import pytest

from trisect.selftest import CRITERIA, Context, DEFAULT_SEED


@pytest.fixture(scope="module")
def ctx():
    return Context()


def _summary(details):
    skip = {"passed", "runtime_ms"}
    parts = []
    for key, value in details.items():
        if key in skip:
            continue
        if isinstance(value, float):
            parts.append(f"{key}={value:.3e}")
        else:
            parts.append(f"{key}={json.dumps(value, default=str)}")
    return " ".join(parts)


@pytest.mark.parametrize("name", list(CRITERIA), ids=list(CRITERIA))
def test_criterion(name, ctx):
    details = CRITERIA[name](ctx, DEFAULT_SEED)
    verdict = "PASS" if details["passed"] else "FAIL"
    print(f"{verdict} {name}: {_summary(details)}")
    assert details["passed"], f"{name}: {_summary(details)}"
