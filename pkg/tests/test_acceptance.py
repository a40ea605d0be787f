"""Acceptance matrix: one test per criterion, one PASS/FAIL line each.

The lines are collected in ``LINES`` and printed at the end of the session
by the terminal-summary hook in conftest.py.
"""

import subprocess
import sys
import time

import pytest

from yosida.verify import Context, run_suite

LINES: dict[int, str] = {}

# criterion -> (suite, runtime budget in seconds or None)
CRITERIA = {
    1: ("pole_counts", 120.0),
    2: ("log_growth", 300.0),
    3: ("schmiegung", None),
    4: ("rescaling", 600.0),
    5: ("separation", None),
    6: ("expansion", None),
    7: ("derivative_proximity", None),
    8: ("first_integral", None),
    9: ("controls", None),
    10: ("determinism", None),
}


def _record(number, result, elapsed, budget, extra_ok=True, note=""):
    ok = result.passed and extra_ok and (budget is None or elapsed <= budget)
    timing = f" runtime={elapsed:.1f}s" + (f" budget={budget:.0f}s" if budget else "")
    LINES[number] = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {result.line()}{timing}{note}"
    return ok


@pytest.mark.parametrize("number", [n for n in CRITERIA if n != 10])
def test_criterion(number):
    suite, budget = CRITERIA[number]
    start = time.perf_counter()
    result = run_suite(suite, Context())
    elapsed = time.perf_counter() - start
    ok = _record(number, result, elapsed, budget)
    assert result.criterion == number
    if budget is not None:
        assert elapsed <= budget, f"{suite} took {elapsed:.1f}s"
    assert ok, result.line()


def test_criterion_10_determinism(tmp_path):
    start = time.perf_counter()
    result = run_suite("determinism", Context())
    # repeated verify runs through the command line must agree byte for byte
    outs = []
    for k in range(2):
        r = subprocess.run(
            [sys.executable, "-m", "yosida", "verify", "--suite", "determinism", "--out", str(tmp_path / f"run{k}")],
            capture_output=True,
            text=True,
        )
        outs.append((r.returncode, (tmp_path / f"run{k}" / "verify.txt").read_bytes()))
    same = outs[0] == outs[1] and outs[0][0] == 0
    elapsed = time.perf_counter() - start
    ok = _record(10, result, elapsed, None, same, f" verify_byte_identical={'yes' if same else 'no'}")
    assert same
    assert ok, result.line()
