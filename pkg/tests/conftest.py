import numpy as np
import pytest

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(id, ok, detail)``."""
    results = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def record(cid: str, ok: bool, detail: str) -> bool:
        results[cid] = (bool(ok), detail)
        print(f"{cid} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(results, key=lambda c: int(c[1:])):
        ok, detail = results[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}  {detail}")
