import math

import pytest

from entiredyn.maps import exp_shift, golden_exp_affine


def bisect(g, lo, hi, tol=1e-15):
    """Plain bisection; g(lo) and g(hi) must differ in sign."""
    glo = g(lo)
    assert glo * g(hi) < 0
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _h(x):
    return math.exp(x) - x - 2.0


# fixed points of exp(z) - 2 on the real line, found without the package
REPELLING_X = bisect(_h, 1.0, 1.5)
ATTRACTING_X = bisect(_h, -2.0, -1.5)


@pytest.fixture(scope="session")
def es():
    return exp_shift(-2)


@pytest.fixture(scope="session")
def golden():
    return golden_exp_affine()


# criterion -> list of (check, ok, detail), filled in by test_acceptance.py
ACCEPTANCE = {}


def record(criterion: int, check: str, ok: bool, detail: str = ""):
    ACCEPTANCE.setdefault(criterion, []).append((check, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(c[1] for c in checks)
        parts = [f"{name}{'' if good else ' FAILED'}" + (f" ({d})" if d else "")
                 for name, good, d in checks]
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: " + "; ".join(parts))
