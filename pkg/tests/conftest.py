import time

import pytest

_criteria = {}


class Criterion:
    """Collects named checks for one acceptance criterion and their timing."""

    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.parts = []
        self.done = False
        self.start = time.perf_counter()
        self.stop = None
        _criteria[number] = self

    def check(self, name, ok, detail=""):
        self.parts.append((name, bool(ok), detail))
        return ok

    @property
    def elapsed(self):
        return (self.stop or time.perf_counter()) - self.start

    def finish(self):
        self.stop = time.perf_counter()
        self.done = True
        self.check(f"time < {self.budget:g} s", self.elapsed < self.budget, f"{self.elapsed:.2f} s")
        failed = [f"{n} ({d})" if d else n for n, ok, d in self.parts if not ok]
        assert not failed, "; ".join(failed)


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        c = _criteria[n]
        ok = c.done and all(p[1] for p in c.parts)
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {c.title}  [{c.elapsed:.2f} s]")
        for name, good, detail in c.parts:
            if not good:
                tr.write_line(f"              failed: {name}" + (f" ({detail})" if detail else ""))
        if not c.done:
            tr.write_line("              failed: raised before completing")
