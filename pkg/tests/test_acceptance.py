"""The acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""

import sys
import time

import pytest

from satohurwitz.acceptance import CHECKS
from satohurwitz.report import PASS


def _run(check):
    t0 = time.perf_counter()
    rep = check.func(S=None, D=None)
    secs = time.perf_counter() - t0
    ok = rep.status == PASS and secs < check.budget
    line = f"{'PASS' if ok else 'FAIL'} {check.name} {secs:.1f}s (budget {check.budget:.0f}s)"
    return ok, line, rep, secs


@pytest.mark.parametrize("check", CHECKS, ids=[c.name for c in CHECKS])
def test_criterion(check, capsys):
    ok, line, rep, secs = _run(check)
    with capsys.disabled():
        sys.stdout.write(f"\n{line}\n")
    assert rep.status == PASS, rep.render()
    assert secs < check.budget, f"{check.name} took {secs:.1f}s, budget {check.budget}s"


def test_twelve_criteria():
    assert len(CHECKS) == 12
    assert len({c.name for c in CHECKS}) == 12


if __name__ == "__main__":
    failed = 0
    for check in CHECKS:
        ok, line, rep, _ = _run(check)
        print(line, flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
