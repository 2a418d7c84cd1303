import functools

import pytest

from excitable.scenarios import get_scenario, run_scenario


@functools.lru_cache(maxsize=None)
def builtin_result(name: str):
    """Each builtin scenario is simulated at most once per test session."""
    return run_scenario(get_scenario(name))


@pytest.fixture(scope="session")
def builtin():
    return builtin_result


# acceptance bookkeeping: tests/test_acceptance.py appends (id, passed, detail)
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    def _record(cid: str, passed: bool, detail: str):
        ACCEPTANCE.append((cid, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {cid}: {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(ACCEPTANCE, key=lambda r: [int(p) if p.isdigit() else p for p in r[0].split(".")]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid:<6} {detail}")
    n_ok = sum(ok for _, ok, _ in ACCEPTANCE)
    terminalreporter.write_line(f"{n_ok}/{len(ACCEPTANCE)} acceptance checks passed")
