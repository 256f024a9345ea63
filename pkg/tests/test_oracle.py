import numpy as np
import pytest

from oracle import canonicalize, oracle_clusters, oracle_significant
from sraster import Metric, cluster_tiles

T, U = (7, 7), (8, 8)
TRACE = [(T, 0), (T, 0), (T, 0), (U, 1), (U, 2)]


def test_oracle_significant_examples():
    assert oracle_significant([], 0, 2, 3) == set()
    assert oracle_significant(TRACE, 1, 2, 3) == {T}
    assert oracle_significant(TRACE, 2, 2, 3) == set()


def test_oracle_clusters_examples():
    assert oracle_clusters(set(), "chebyshev", 1, 1) == set()
    assert oracle_clusters({(0, 0), (0, 1), (5, 5)}, "chebyshev", 1, 2) == {frozenset({(0, 0), (0, 1)})}
    sigma = {(0, 0), (3, 3), (4, 4), (9, 0)}
    assert len(oracle_clusters(sigma, "chebyshev", 1, 1)) == 3


def test_canonicalize():
    assert canonicalize([]) == []
    a, b = {(5, 5), (5, 6)}, {(-1, 0), (0, 0)}
    assert canonicalize([a, b]) == canonicalize([b, a]) == [[(-1, 0), (0, 0)], [(5, 5), (5, 6)]]


@pytest.mark.parametrize("kind", ["chebyshev", "manhattan"])
@pytest.mark.parametrize("delta", [1, 2, 3])
@pytest.mark.parametrize("mu", [1, 2, 5])
def test_cluster_tiles_equals_oracle_on_random_sets(kind, delta, mu):
    # 1,000 sets over the 18 parameter combinations
    rng = np.random.default_rng([len(kind), delta, mu])
    m = Metric(kind, delta)
    for _ in range(56):
        n = int(rng.integers(0, 201))
        span = int(rng.integers(5, 60))
        sigma = {tuple(t) for t in rng.integers(-span, span, (n, 2)).tolist()}
        assert canonicalize(cluster_tiles(sigma, m, mu)) == canonicalize(oracle_clusters(sigma, kind, delta, mu))
