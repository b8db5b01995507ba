import contextlib
import time

import numpy as np
import pytest

from cicdecim.cic import CicParams, design

REF = CicParams(N=5, M=1, R=16, B_in=6)
PRUNED_INTEGRATORS = [25, 22, 20, 18, 16]
PRUNED_COMBS = [16, 16, 16, 16, 16]

_RESULTS: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ref_params():
    return REF


@pytest.fixture(scope="session")
def pruned_design():
    return design(REF, PRUNED_INTEGRATORS, PRUNED_COMBS)


@pytest.fixture(scope="session")
def full_design():
    return design(REF)


@pytest.fixture(scope="session")
def pruned_chain(pruned_design):
    from cicdecim.chain import build_chain

    return build_chain(pruned_design)


@pytest.fixture
def criterion():
    """Context manager that logs one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def _run(name: str, budget_s: float | None = None):
        info: dict[str, str] = {}
        t0 = time.perf_counter()
        try:
            yield info
            elapsed = time.perf_counter() - t0
            if budget_s is not None:
                assert elapsed < budget_s, f"took {elapsed:.1f}s, budget {budget_s}s"
        except BaseException as exc:
            line = f"FAIL  {name}  ({time.perf_counter() - t0:.1f}s) {info.get('detail', '')} :: {exc}"
            _RESULTS.append(line)
            print(line)
            raise
        line = f"PASS  {name}  ({elapsed:.1f}s) {info.get('detail', '')}"
        _RESULTS.append(line)
        print(line)

    return _run


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line.splitlines()[0][:300])
