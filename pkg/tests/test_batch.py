from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import canonicalize, oracle_clusters
from streams import CountingIter
from sraster import BatchParams, ConfigError, Metric, RejectedInputError
from sraster import accumulate, cluster_tiles, raster, raster_prime, significant_tiles

CHEB1 = Metric("chebyshev", 1)
A = (0.00004, 0.00004)
B = (0.00014, 0.00004)
C = (0.5, 0.5)
FIFTEEN = [A] * 5 + [B] * 5 + [C] * 5


def test_accumulate_examples():
    assert accumulate([], 4) == {}
    assert accumulate([A] * 5, 4) == {(0, 0): 5}
    assert accumulate([A] * 3 + [B] * 2, 4) == {(0, 0): 3, (1, 0): 2}


def test_accumulate_reports_record_index():
    with pytest.raises(RejectedInputError) as err:
        accumulate([A, A, (float("nan"), 1.0)], 4)
    assert err.value.index == 2


def test_accumulate_single_pass():
    it = CountingIter([A] * 7 + [B] * 3)
    counts = accumulate(iter(it), 4)
    assert sum(counts.values()) == 10
    assert it.served == [1] * 10 and it.exhausted == 1


def test_significant_tiles_examples():
    assert significant_tiles({}, 1) == set()
    assert significant_tiles({"A": 4, "B": 5}, 5) == {"B"}
    assert significant_tiles({"A": 4, "B": 5}, 1) == {"A", "B"}


def test_cluster_tiles_examples():
    assert cluster_tiles(set(), CHEB1, 1) == []
    assert cluster_tiles({(0, 0), (0, 1), (5, 5)}, CHEB1, 2) == [{(0, 0), (0, 1)}]
    diag = {(0, 0), (1, 1), (2, 2)}
    assert cluster_tiles(diag, CHEB1, 3) == [diag]
    assert cluster_tiles(diag, Metric("manhattan", 1), 3) == []


def test_cluster_order_is_by_smallest_tile():
    sigma = {(9, 9), (9, 10), (-3, 0), (-3, 1), (0, 5), (1, 5)}
    out = cluster_tiles(sigma, CHEB1, 1)
    assert [min(c) for c in out] == [(-3, 0), (0, 5), (9, 9)]


def test_raster_examples():
    p = BatchParams(prec=4, tau=5, metric=CHEB1, mu=2)
    assert raster([], p) == []
    assert raster(FIFTEEN, p) == [{(0, 0), (1, 0)}]
    assert raster([A] * 4, p) == []


def test_raster_prime_examples():
    p = BatchParams(prec=4, tau=5, metric=CHEB1, mu=2)
    assert raster_prime([], p) == []
    [cluster] = raster_prime(FIFTEEN, p)
    assert cluster == {(0, 0): [A] * 5, (1, 0): [B] * 5}
    assert sum(len(v) for v in cluster.values()) == 10


@pytest.mark.parametrize("kw", [dict(tau=0), dict(mu=0), dict(prec=16), dict(prec=-1)])
def test_batch_params_validation(kw):
    with pytest.raises(ConfigError):
        BatchParams(**kw)


sigmas = st.sets(st.tuples(st.integers(-12, 12), st.integers(-12, 12)), max_size=120)


@settings(max_examples=300, deadline=None)
@given(sigmas, st.sampled_from(["chebyshev", "manhattan"]), st.integers(1, 3), st.sampled_from([1, 2, 5]))
def test_cluster_tiles_matches_union_find_oracle(sigma, kind, delta, mu):
    out = cluster_tiles(sigma, Metric(kind, delta), mu)
    assert canonicalize(out) == canonicalize(oracle_clusters(sigma, kind, delta, mu))
    # disjoint, inside sigma
    seen = [t for c in out for t in c]
    assert len(seen) == len(set(seen)) and set(seen) <= sigma


points = st.lists(
    st.tuples(st.integers(0, 30), st.integers(0, 30)).map(lambda t: (t[0] * 0.01 + 0.001, t[1] * 0.01 + 0.002)),
    max_size=300,
)


@settings(max_examples=100, deadline=None)
@given(points, st.integers(1, 4), st.integers(1, 3))
def test_raster_prime_agrees_with_raster(pts, tau, mu):
    p = BatchParams(prec=2, tau=tau, metric=CHEB1, mu=mu)
    plain = raster(pts, p)
    prime = raster_prime(pts, p)
    assert [set(c) for c in prime] == plain
    counts = accumulate(pts, 2)
    for c in prime:
        for t, retained in c.items():
            assert len(retained) == counts[t]
            assert Counter(retained) == Counter(q for q in pts if (round(q[0] * 100 - 0.1), round(q[1] * 100 - 0.2)) == t)


@settings(max_examples=100, deadline=None)
@given(points, st.integers(1, 4), st.integers(1, 3))
def test_excluded_significant_tiles_sit_in_small_components(pts, tau, mu):
    p = BatchParams(prec=2, tau=tau, metric=CHEB1, mu=mu)
    sigma = significant_tiles(accumulate(pts, 2), tau)
    kept = {t for c in raster(pts, p) for t in c}
    every = oracle_clusters(sigma, "chebyshev", 1, 1)
    for comp in every:
        assert (comp <= kept) == (len(comp) >= mu)
