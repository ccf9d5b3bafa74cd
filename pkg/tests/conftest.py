import os
import time
from contextlib import contextmanager
from types import SimpleNamespace

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """``with criterion(n, limit_s) as rec:`` records one PASS/FAIL line for criterion n."""
    lines = request.config.stash[_LINES]

    @contextmanager
    def run(num, limit=None):
        rec = SimpleNamespace(detail="")
        t0 = time.perf_counter()
        try:
            yield rec
            elapsed = time.perf_counter() - t0
            if limit is not None:
                assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
        except BaseException as exc:
            line = f"criterion {num}: FAIL  {type(exc).__name__}: {exc}".splitlines()[0]
            lines.append(line)
            print(line)
            raise
        line = f"criterion {num}: PASS  {rec.detail} ({time.perf_counter() - t0:.1f}s)"
        lines.append(line)
        print(line)

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
