import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        checks = ACCEPTANCE[key]
        ok = all(passed for passed, _ in checks)
        detail = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"{key:<4}{'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record():
    """``record("C3", passed, detail)`` stores one sub-check of a criterion."""
    def _record(key, passed, detail):
        ACCEPTANCE.setdefault(key, []).append((bool(passed), detail))
        print(f"{key} {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return _record
