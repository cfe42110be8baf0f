"""The thirteen acceptance criteria, each with its time bound in seconds."""

import pytest

from galcohom.suites import CRITERIA, run_criterion

BOUNDS = {1: 1, 2: 30, 3: 10, 4: 60, 5: 60, 6: 10, 7: 60, 8: 30, 9: 1, 10: 60, 11: 30, 12: 1, 13: 5}

RESULTS = {}


def report(n, res):
    failed = [c.name for c in res.checks if not c.passed]
    ok = res.passed and res.seconds < BOUNDS[n]
    line = (f"criterion {n:2d} [{CRITERIA[n][0]}]: {'PASS' if ok else 'FAIL'} "
            f"({len(res.checks) - len(failed)}/{len(res.checks)} checks, {res.seconds:.2f}s of {BOUNDS[n]}s)")
    if failed:
        line += " failed: " + ", ".join(failed[:5])
    RESULTS[n] = line
    print(line)
    return ok


def test_every_criterion_registered():
    assert sorted(CRITERIA) == list(range(1, 14))


@pytest.mark.parametrize("n", range(1, 14))
def test_criterion(n):
    res = run_criterion(n)
    report(n, res)
    assert res.passed, [c.name for c in res.checks if not c.passed]
    assert res.seconds < BOUNDS[n]
