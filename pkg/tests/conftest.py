import numpy as np
import pytest
from hypothesis import settings

from ncftpl.domain import BoxDomain

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def line():
    return BoxDomain.cube(1)


@pytest.fixture
def square():
    return BoxDomain.cube(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(number, label: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>3}  {'PASS' if ok else 'FAIL'}  {label}: {detail}"
        key = str(number)
        lines.append((int(key.rstrip("abcdefghijklmnopqrstuvwxyz")), key, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for *_, line in sorted(lines):
            terminalreporter.write_line(line)
