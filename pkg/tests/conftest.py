import numpy as np
import pytest

from boolnoise.boolean_fn import BooleanFunction


def random_function(rng, n, balanced=False):
    size = 1 << n
    if balanced:
        table = np.zeros(size, dtype=np.uint8)
        table[rng.choice(size, size // 2, replace=False)] = 1
    else:
        table = rng.integers(0, 2, size, dtype=np.uint8)
    return BooleanFunction(n, table)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(label: str, ok: bool, detail: str, seconds: float):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {label:<3} {detail}  [{seconds:.2f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
