"""The fourteen acceptance criteria, each at its stated tolerance.

A single ``verify all`` run feeds criteria 1 to 13; criterion 14 reruns the suite
at one and eight workers and compares the canonical payloads byte for byte.
"""

import time

import pytest

from mdimlab.checks import run_suite
from mdimlab.cli import verify_payload


@pytest.fixture(scope="module")
def baseline():
    t0 = time.perf_counter()
    checks = run_suite("all", 1.0, workers=1)
    return checks, time.perf_counter() - t0


def _judge(baseline, record_criterion, criterion):
    checks = [c for c in baseline[0] if c.criterion == criterion]
    assert checks, f"no checks registered for criterion {criterion}"
    detail = "; ".join(f"{c.name}={c.measured:.6g}" for c in checks)
    ok = all(c.passed for c in checks)
    record_criterion(criterion, ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    assert ok, [c.to_json() for c in checks if not c.passed]


@pytest.mark.parametrize("criterion", range(1, 14))
def test_criterion(baseline, record_criterion, criterion):
    _judge(baseline, record_criterion, criterion)


def test_criterion_14_determinism(baseline, record_criterion):
    first = verify_payload(baseline[0])
    again = verify_payload(run_suite("all", 1.0, workers=1))
    wide = verify_payload(run_suite("all", 1.0, workers=8))
    ok = first == again == wide
    detail = f"payload {len(first)} bytes; repeat identical={first == again}; 8 workers identical={first == wide}"
    record_criterion(14, ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion 14: {detail}")
    assert ok


def test_verify_all_runtime(baseline):
    assert baseline[1] < 15 * 60
