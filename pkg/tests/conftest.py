import numpy as np
import pytest

from sprp import make_gaussian_density

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def gauss():
    return {d: make_gaussian_density(d) for d in (1, 2, 3, 5)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_results():
    from sprp.acceptance import run_all

    results = {r.number: r for r in run_all()}
    for r in results.values():
        _ACCEPTANCE_LINES.append(r.summary_line())
        for c in r.checks:
            flag = "ok  " if c.passed else "MISS"
            note = f"  ({c.note})" if c.note else ""
            _ACCEPTANCE_LINES.append(f"      {flag} {c.name}: {c.statistic:.6g} <= {c.threshold:.6g}{note}")
    return results


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
