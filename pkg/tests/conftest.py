import numpy as np
import pytest

from orthoinv.invariants import DEFAULT, fingerprint
from orthoinv.oracle import invariance_sweep, random_coordinates, random_points


def random_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def generic_points(n, d, count, seed, variant=DEFAULT):
    """Random points whose fingerprints carry no genericity flag."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        c = random_coordinates(n, d, rng)
        if not fingerprint(c, variant).flags:
            out.append(c)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(scope="session")
def sweep_reports():
    """Exhaustive invariance sweeps shared between modules (the (4,4) one is slow)."""
    cache = {}

    def get(n, degree, count=50, seed=7, variant=DEFAULT):
        key = (n, degree, count, seed, variant)
        if key not in cache:
            pts = random_points(n, degree // 2, count, seed)
            cache[key] = invariance_sweep(pts, variant, seed)
        return cache[key]
    return get


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
