import numpy as np
import pytest

from graphsamp.graph import Graph, gen_small_world, normalized_laplacian
from graphsamp.spectral import dense_spectrum


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def weighted_random_graph(n, seed, extra=None):
    """Random connected weighted graph: a spanning path plus random chords."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    pairs = {tuple(sorted((int(perm[i]), int(perm[i + 1])))) for i in range(n - 1)}
    extra = n if extra is None else extra
    while len(pairs) < n - 1 + extra and len(pairs) < n * (n - 1) // 2:
        i, j = rng.choice(n, 2, replace=False)
        pairs.add((int(min(i, j)), int(max(i, j))))
    pairs = sorted(pairs)
    return Graph.from_edges(n, pairs, rng.uniform(0.5, 2.0, len(pairs)))


def spectrum_of(g, k):
    return dense_spectrum(normalized_laplacian(g), k)


@pytest.fixture(scope="session")
def sw200():
    g = gen_small_world(200, 8, 0.1, 3)
    return g, normalized_laplacian(g)


@pytest.fixture(scope="session")
def sw64():
    g = gen_small_world(64, 6, 0.2, 11)
    L = normalized_laplacian(g)
    return g, L, dense_spectrum(L, 8)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance as acc
    if not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acc.RESULTS:
        terminalreporter.write_line(line)
