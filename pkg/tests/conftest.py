import numpy as np
import pytest

from ctqw_search.lattice import build_hex_patch, build_paper31

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def paper31():
    return build_paper31()


@pytest.fixture(scope="session")
def hex_patches():
    return {layers: build_hex_patch(layers) for layers in range(0, 6)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key}: {detail}")
