import time

import pytest

# one entry per acceptance line: (tag, label, measured, tolerance, passed)
ACCEPTANCE = []
_START = time.perf_counter()
RUNTIME_TARGET_S = 60.0


class AcceptanceLog:
    def record(self, tag, label, measured, tolerance, passed):
        line = (tag, label, measured, tolerance, bool(passed))
        ACCEPTANCE.append(line)
        print(format_line(line))
        return bool(passed)


def format_line(line):
    tag, label, measured, tolerance, passed = line
    return f"{tag:5s} {'PASS' if passed else 'FAIL'}  {label}: measured {measured} vs {tolerance}"


@pytest.fixture
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE:
        tr.write_line(format_line(line))
    elapsed = time.perf_counter() - _START
    ok = elapsed < RUNTIME_TARGET_S
    tr.write_line(f"AC14  {'PASS' if ok else 'FAIL'}  full suite runtime: "
                  f"measured {elapsed:.1f} s vs < {RUNTIME_TARGET_S:.0f} s")
