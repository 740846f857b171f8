import numpy as np
import pytest

from pabm.model import PabmParams, random_params


def exact_params(n, K, seed, balance=None):
    """Random PABM parameters with every community nonempty."""
    rng = np.random.default_rng(seed)
    while True:
        params = random_params(n, K, rng, alpha=balance)
        if np.all(params.community_sizes() > 0):
            return params


def blocky_params(sizes, seed):
    """Deterministic labels ``1..K`` in contiguous blocks with random popularities."""
    rng = np.random.default_rng(seed)
    z = np.repeat(np.arange(1, len(sizes) + 1), sizes)
    Lam = rng.uniform(0.1, 1.0, size=(z.size, len(sizes)))
    return PabmParams(z=z, Lam=Lam)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ----------------------------------------------------------

ACCEPTANCE = {}


def record_criterion(number, passed, detail, skipped=False):
    status = "SKIP" if skipped else ("PASS" if passed else "FAIL")
    line = f"[{status}] criterion {number}: {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
