import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, n):
    q, r = np.linalg.qr(crandn(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def block_aligned_instance(rng, nt, nr, ns, ntrx):
    """Channel plus analog stage for which the decomposition drops nothing.

    The range of ``f_rf`` is a random ``k1``-dimensional subspace of span(V1)
    plus a ``ntrx - k1``-dimensional subspace of span(V2), mixed by a random
    invertible matrix. Then ``V2^H P_RF V1 = 0`` exactly while ``M`` is a
    generic (non-identity, unless ``k1 = ns``) orthogonal projector.
    """
    v = random_unitary(rng, nt)
    u = random_unitary(rng, nr)
    sigma = np.sort(rng.uniform(0.5, 10.0, nr))[::-1]
    h = (u * sigma) @ v[:, :nr].conj().T
    k1 = int(rng.integers(1, min(ns, ntrx) + 1))
    k2 = ntrx - k1
    if k2 > nt - ns:
        k2 = nt - ns
        k1 = ntrx - k2
    part1 = v[:, :ns] @ crandn(rng, ns, k1)
    part2 = v[:, ns:] @ crandn(rng, nt - ns, k2)
    f_rf = np.hstack([part1, part2]) @ crandn(rng, ntrx, ntrx)
    return h, f_rf


ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    """Record and print one acceptance line; returns ``passed`` for asserting."""
    line = f"{'PASS' if passed else 'FAIL'} | {criterion} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
