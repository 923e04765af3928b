import math
import time

import pytest

from backhaul_mcp import experiments as exp
from backhaul_mcp.params import Channel, Model, SystemParams

# one "PASS/FAIL criterion N: ..." line per acceptance criterion, echoed in the summary
ACCEPTANCE_LINES: dict[int, str] = {}


def record(number: int, passed: bool, detail: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture
def wyner():
    return SystemParams(model=Model.WYNER, alpha=0.4, p=10.0, c_backhaul=3.0)


@pytest.fixture
def sh():
    return SystemParams(model=Model.SOFT_HANDOFF, alpha=0.4, p=10.0, c_backhaul=3.0)


@pytest.fixture
def rayleigh_sh():
    return SystemParams(model=Model.SOFT_HANDOFF, alpha=0.5, p=10.0, c_backhaul=3.0,
                        channel=Channel.RAYLEIGH)


@pytest.fixture(scope="session")
def all_figures(tmp_path_factory):
    """{fig_id: (seconds, csv rows as dicts)} for every figure at default settings."""
    out = tmp_path_factory.mktemp("figures")
    data = {}
    for fig_id in sorted(exp.FIGURES):
        start = time.perf_counter()
        paths = exp.run_figure(fig_id, out)
        data[fig_id] = (time.perf_counter() - start, exp.read_csv(paths["csv"]))
    return data


def rows_by_axis(rows):
    """{axis value: {scheme: (rate, uncertainty)}}, skipping error rows."""
    table: dict = {}
    for row in rows:
        if row["rate_bits"].startswith("ERR:"):
            continue
        unc = float(row["uncertainty"] or 0.0)
        table.setdefault(float(row["axis"]), {})[row["scheme"]] = (float(row["rate_bits"]), unc)
    return table


def mc_slack(*uncertainties):
    return 1e-9 + 3.0 * math.sqrt(sum(u * u for u in uncertainties))
