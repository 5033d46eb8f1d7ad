import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_joint(rng, shape, sparsity=0.0):
    p = rng.random(shape)
    if sparsity:
        p[rng.random(shape) < sparsity] = 0.0
        if p.sum() == 0:
            p.flat[0] = 1.0
    return p / p.sum()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
