"""Acceptance criteria 1-10.

Each test runs the named check with every parameter and tolerance pinned
here, prints one PASS/FAIL line, and fails when the check fails or runs over
its time budget.  Run directly (``python3 tests/test_acceptance.py``) for the
bare list of lines.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from f2sketch.checks import run_check

F = Fraction

# (criterion, check id, pinned keyword arguments, runtime budget in seconds)
CRITERIA = [
    (1, "parseval", {"seed": 0, "per_n": 100, "nmax": 12}, 10),
    (2, "recmaj-4d-over-n", {"k": 2}, 600),
    (3, "addr-d-over-n", {"n": 4}, 60),
    (4, "domination", {"trials": 500, "seed": 0}, 600),
    (5, "sandwich", {"seed": 0}, 1800),
    (6, "ltf-sketch", {"n": 64, "k": 4, "delta": F(1, 10), "trials": 10_000, "seed": 0, "ci_max": 0.12}, 300),
    (7, "onebit", {"spec": "chi:1000:0", "threshold": F(1, 200)}, 600),
    (8, "maj-tightness", {"ns": (5, 7, 9, 11), "tol": 0.5}, 1200),
    (9, "slam-composition-ip", {"pairs": 200, "comps": 100, "seed": 0, "eps_max": F(1, 20)}, 900),
    (10, "streaming", {"matrices": 100, "streams": 10_000, "seed": 0, "delta": F(1, 8), "slack": 0.02}, 300),
]

LINES: list[str] = []


def _run(num, name, kw, budget):
    res = run_check(name, **kw)
    in_time = res.seconds <= budget
    ok = res.passed and in_time
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:>2} {name} ({res.seconds:.1f}s, budget {budget}s)"
    return ok, line, res


@pytest.mark.slow
@pytest.mark.parametrize("num, name, kw, budget", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(num, name, kw, budget):
    ok, line, res = _run(num, name, kw, budget)
    LINES.append(line)
    print(line)
    assert res.passed, f"{name} failed: {res.details}"
    assert res.seconds <= budget, f"{name} took {res.seconds:.1f}s > {budget}s"


if __name__ == "__main__":
    for c in CRITERIA:
        print(_run(*c)[1], flush=True)
