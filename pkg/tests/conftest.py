"""Shared fixtures: the standard offspring laws and small hand-built trees."""

import numpy as np
import pytest

import gwroot as g
from gwroot.trees import free_tree_from_edges


@pytest.fixture(scope="session")
def binom2():
    return g.make_family("binomial", {"k": 2})


@pytest.fixture(scope="session")
def binom3():
    return g.make_family("binomial", {"k": 3})


@pytest.fixture(scope="session")
def poisson1():
    return g.make_family("poisson")


@pytest.fixture(scope="session")
def geometric12():
    return g.make_family("geometric")


@pytest.fixture(scope="session")
def motzkin():
    return g.make_family("uniform-set", {"values": [0, 1, 2]})


@pytest.fixture(scope="session")
def fullbinary():
    return g.make_family("uniform-set", {"values": [0, 2]})


@pytest.fixture(scope="session")
def special3():
    # 0 with prob 2/3, 3 with prob 1/3: critical, and 3 is a special degree.
    return g.OffspringDistribution.from_pmf({0: "2/3", 3: "1/3"})


@pytest.fixture
def path3():
    return free_tree_from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def path4():
    return free_tree_from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def star4():
    return free_tree_from_edges(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def spider123():
    # Arms of lengths 1, 2 and 3 off a hub: no symmetry anywhere.
    edges = [(0, 1), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6)]
    return free_tree_from_edges(7, edges)


@pytest.fixture
def hub11():
    # Hub with three leaves, two single-child nodes and a two-leaf node.
    edges = [
        (0, 1),
        (0, 2),
        (0, 3),
        (0, 4),
        (4, 6),
        (0, 5),
        (5, 7),
        (0, 8),
        (8, 9),
        (8, 10),
    ]
    return free_tree_from_edges(11, edges)


def make_corpus(dists, trees, max_n, seed):
    """Round-robin (dist, free tree) pairs over sizes 2..max_n, skipping
    sizes a law cannot produce."""
    rng = np.random.default_rng(seed)
    out = []
    n = 2
    i = 0
    while len(out) < trees:
        dist = dists[i % len(dists)]
        if g.is_feasible(dist, n):
            rooted = g.sample_conditional_tree(dist, n, rng)
            out.append((dist, g.forget_root(rooted)))
        i += 1
        if i % len(dists) == 0:
            n = n + 1 if n < max_n else 2
    return out


@pytest.fixture(scope="session")
def corpus_dists(binom2, poisson1, geometric12, motzkin):
    return [binom2, poisson1, geometric12, motzkin]
