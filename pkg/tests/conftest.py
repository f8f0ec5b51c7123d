import numpy as np
import pytest

from sweepcl import SolverConfig, Scheme, TimeStepping, build_grid, get_problem, simulate

SCHEMES = {
    "first-order": SolverConfig(scheme=Scheme.FIRST_ORDER),
    "omega-0.5": SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=0.5),
    "hires": SolverConfig(),
}


@pytest.fixture(params=list(SCHEMES), ids=list(SCHEMES))
def any_cfg(request):
    return SCHEMES[request.param]


def run_named(name, I, cfg, tau_ratio=None, t_end=None, N=None, **kw):
    p = get_problem(name, **kw)
    g = build_grid(*p.domain, I)
    r = p.defaults.tau_ratio if tau_ratio is None else tau_ratio
    if N is not None:
        ts = TimeStepping(r * g.h, N)
    else:
        ts = TimeStepping.from_ratio(g, r, p.defaults.t_end if t_end is None else t_end)
    return p, simulate(p, g, ts, cfg)


def rel(a, b):
    return abs(a - b) / abs(b)


# acceptance verdicts, printed once at the end of the session
VERDICTS: dict = {}


def verdict(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
