import re

import numpy as np
import pytest

from wsnfeedback.policies import CostModel, DpGrid

# default operating point
ALPHA = 0.96
S_A = 20.0
B = 5


@pytest.fixture
def cost():
    return CostModel(1.0, 0.25)


@pytest.fixture
def small_grid():
    # coarse grid: keeps DP solves in the second range
    return DpGrid(n_v=501, n_zeta=101, n_sm=100)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance summary -------------------------------------------------------

_CRITERIA: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)_", report.nodeid)
    if not m or (report.when != "call" and report.passed):
        return
    entry = _CRITERIA.setdefault(int(m.group(1)), {"ok": True, "details": []})
    entry["ok"] &= report.passed
    entry["details"] += [v for k, v in report.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entry = _CRITERIA[n]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}")
        for d in entry["details"]:
            terminalreporter.write_line(f"    {d}")
