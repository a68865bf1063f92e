import random
import time
from contextlib import contextmanager

import pytest

from polysem.fixtures import mixture_example

# criterion number -> (title, passed, detail)
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def mixture():
    return mixture_example()


@pytest.fixture
def rng():
    return random.Random(20240611)


class _Recorder:
    def __init__(self):
        self.detail = ""

    @contextmanager
    def __call__(self, number: int, title: str):
        start = time.perf_counter()
        try:
            yield self
        except BaseException as exc:
            ACCEPTANCE[number] = (title, False, f"{type(exc).__name__}: {exc}".splitlines()[0])
            print(f"acceptance {number} ({title}): FAIL")
            raise
        took = time.perf_counter() - start
        detail = f"{took:.1f}s" + (f", {self.detail}" if self.detail else "")
        ACCEPTANCE[number] = (title, True, detail)
        print(f"acceptance {number} ({title}): PASS [{detail}]")


@pytest.fixture
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
