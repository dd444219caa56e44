import time
from contextlib import contextmanager

import pytest

_VERDICTS = pytest.StashKey[list]()


class CriterionRecorder:
    """Records one PASS/FAIL/SKIP line per acceptance criterion."""

    def __init__(self, sink):
        self._sink = sink

    @contextmanager
    def check(self, name, budget_s=None):
        start = time.perf_counter()
        detail = {}
        try:
            yield detail
        except pytest.skip.Exception as exc:
            self._emit("SKIP", name, str(exc.msg))
            raise
        except BaseException as exc:
            self._emit("FAIL", name, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
            raise
        elapsed = time.perf_counter() - start
        note = detail.get("note", "")
        timing = f"{elapsed:.2f}s" + (f" of {budget_s:g}s budget" if budget_s else "")
        if budget_s is not None and elapsed > budget_s:
            self._emit("FAIL", name, f"runtime {timing}; {note}")
            pytest.fail(f"{name}: runtime {elapsed:.2f}s exceeds {budget_s:g}s")
        self._emit("PASS", name, f"{note}; {timing}" if note else timing)

    def _emit(self, verdict, name, detail):
        line = f"{verdict} {name}: {detail}"
        self._sink.append(line)
        print(line)


@pytest.fixture
def criterion(request):
    return CriterionRecorder(request.config.stash.setdefault(_VERDICTS, []))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
