import numpy as np
import pytest

from rankprune.data import Dataset

_ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_report():
    def report(criterion, passed, detail, skipped=False):
        tag = "SKIP" if skipped else ("PASS" if passed else "FAIL")
        line = f"[{tag}] {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return report


def cnp_sample(rng, n, p_y1, rho1, rho0):
    """Hidden labels with exactly round(p_y1 n) positives and CNP-flipped observed labels."""
    n_pos = int(round(p_y1 * n))
    y = np.zeros(n, dtype=np.int64)
    y[:n_pos] = 1
    rng.shuffle(y)
    u = rng.random(n)
    flip = np.where(y == 1, u < rho1, u < rho0)
    s = np.where(flip, 1 - y, y)
    return y, s


@pytest.fixture
def six_point():
    """Small hand-checkable example: g and observed labels."""
    g = np.array([0.9, 0.85, 0.2, 0.8, 0.15, 0.1])
    s = np.array([1, 1, 1, 0, 0, 0])
    return g, s


@pytest.fixture
def blobs():
    rng = np.random.default_rng(11)
    n1, n0 = 60, 140
    X = np.vstack([rng.normal(2.0, 1.0, (n1, 2)), rng.normal(-1.0, 1.0, (n0, 2))])
    y = np.r_[np.ones(n1), np.zeros(n0)].astype(np.int64)
    order = rng.permutation(n1 + n0)
    return Dataset(X[order], y[order], y[order])
