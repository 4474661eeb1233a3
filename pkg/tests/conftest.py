import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Call with (number, title, bound_seconds, ok, detail) after starting a clock with .start()."""
    lines = request.config.stash.setdefault(_LINES, [])

    class Recorder:
        def __init__(self):
            self.t0 = time.perf_counter()

        def start(self):
            self.t0 = time.perf_counter()

        def finish(self, number, title, bound, ok, detail):
            elapsed = time.perf_counter() - self.t0
            passed = bool(ok) and elapsed < bound
            line = f"acceptance {number}: {'PASS' if passed else 'FAIL'} {title} [{detail}] {elapsed:.1f}s < {bound}s"
            lines.append(line)
            print(line)
            assert ok, line
            assert elapsed < bound, line

    return Recorder()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
