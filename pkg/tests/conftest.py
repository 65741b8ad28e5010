import math

import pytest

from hlplab.extremals import SpaceParams

# The five Thm21-admissible configurations used across the suite: under the
# equality hypotheses beta = n(p-2)/2 with 2 < p <= 3 and q = 2(n+gamma)/n.
THM21_CONFIGS = [
    SpaceParams(n=1, p=3.0, beta=0.5, q=2.0, gamma=0.0),
    SpaceParams(n=1, p=2.5, beta=0.25, q=2.0, gamma=0.0),
    SpaceParams(n=2, p=3.0, beta=1.0, q=2.0, gamma=0.0),
    SpaceParams(n=3, p=2.75, beta=1.125, q=8.0 / 3.0, gamma=1.0),
    SpaceParams(n=1, p=2.2, beta=0.1, q=3.0, gamma=0.5),
]

FLAGSHIP = THM21_CONFIGS[0]


@pytest.fixture
def flagship():
    return FLAGSHIP


def rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def log_radii(lo=1e-3, hi=1e3, k=200):
    return [lo * (hi / lo) ** (i / (k - 1)) for i in range(k)]


# acceptance results, one entry per checked part: (criterion, part, ok, detail)
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def record_acceptance(criterion: int, part: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.append((criterion, part, bool(ok), detail))
    print(f"criterion {criterion} [{part}]: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted({c for c, *_ in ACCEPTANCE}):
        parts = [(part, ok, detail) for c, part, ok, detail in ACCEPTANCE if c == crit]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        tr.write_line(f"criterion {crit}: {verdict}")
        for part, ok, detail in parts:
            tr.write_line(f"    {'ok  ' if ok else 'FAIL'} {part}: {detail}")


__all__ = ["THM21_CONFIGS", "FLAGSHIP", "rel", "log_radii", "math", "ACCEPTANCE", "record_acceptance"]
