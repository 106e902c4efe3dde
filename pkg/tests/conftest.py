from __future__ import annotations

from itertools import combinations

import sympy
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def sympy_rank(rows) -> int:
    """Independent exact rank."""
    if not rows or not rows[0]:
        return 0
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if hasattr(x, "numerator") else x
                          for x in r] for r in rows]).rank()


def sympy_rank_cols(cols) -> int:
    if not cols:
        return 0
    return sympy_rank([list(r) for r in zip(*cols)])


def brute_rank_expansion(m) -> list[int]:
    """``min rank`` over every k-subset of columns, by sympy."""
    cols = m.columns()
    return [min(sympy_rank_cols([cols[i] for i in s]) for s in combinations(range(m.cols), k))
            for k in range(1, m.cols + 1)]


# acceptance lines, printed at the end of the session
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
