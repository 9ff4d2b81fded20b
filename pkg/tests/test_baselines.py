import numpy as np
import pytest

from lmclust.baselines import (
    INF_SENTINEL_FACTOR,
    d2_seed_assign,
    embed,
    embed_and_kmeans,
    lloyd,
)
from lmclust.core import Clustering, TheoryParams
from lmclust.evaluation import clustering_distance
from lmclust.oracle import CountingOracle, EuclideanOracle, MatrixOracle
from lmclust.synth import generate_planted

LINE = EuclideanOracle([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
PLANTED_LINE = Clustering([0, 0, 0, 1, 1, 1], 2)


@pytest.mark.parametrize("seed", range(20))
def test_embed_kmeans_line(seed):
    res = embed_and_kmeans(LINE, 2, 2, np.random.default_rng(seed))
    assert clustering_distance(res.clustering, PLANTED_LINE).distance == 0
    assert res.queries_used == 2
    assert len(set(res.landmarks)) == 2


@pytest.mark.parametrize("seed", range(20))
def test_d2_line(seed):
    # once the first center lands in one group, the other group carries
    # almost all the D^2 mass; check the query count and the partition shape
    res = d2_seed_assign(LINE, 2, np.random.default_rng(seed))
    assert res.queries_used == 2
    assert res.clustering.k == 2
    assert len(set(res.landmarks)) == 2


def test_one_cluster():
    rng = np.random.default_rng(0)
    assert embed_and_kmeans(LINE, 3, 1, rng).clustering.labels.tolist() == [0] * 6
    assert d2_seed_assign(LINE, 1, rng).clustering.labels.tolist() == [0] * 6


def test_k_equals_n_is_exact():
    rng = np.random.default_rng(1)
    for _ in range(5):
        res = d2_seed_assign(LINE, 6, rng)
        assert sorted(res.landmarks) == list(range(6))
        assert sorted(res.clustering.labels.tolist()) == list(range(6))
        km = embed_and_kmeans(LINE, 6, 6, rng)
        assert sorted(km.clustering.labels.tolist()) == list(range(6))


def test_counting_ledger():
    o = CountingOracle(LINE)
    embed_and_kmeans(o, 4, 2, np.random.default_rng(3))
    assert o.count == 4
    d2_seed_assign(o, 2, np.random.default_rng(3))
    assert o.count <= 6  # rows already cached are not charged twice


def test_argument_checks():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        embed_and_kmeans(LINE, 7, 2, rng)
    with pytest.raises(ValueError):
        embed_and_kmeans(LINE, 2, 0, rng)
    with pytest.raises(ValueError):
        d2_seed_assign(LINE, 7, rng)


def test_embed_replaces_infinity():
    x, flag = embed([np.array([0, 2.0, np.inf]), np.array([3.0, 0, 1])])
    assert flag
    assert x.shape == (3, 2)
    assert x[2, 0] == INF_SENTINEL_FACTOR * 3
    _, flag = embed([np.array([0.0, 1.0])])
    assert not flag


def test_d2_second_center_distribution():
    # points at 0, 1, 3; given the first center 0 the second is 1 w.p. 1/10
    m = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
    o = MatrixOracle(m)
    hits = {1: 0, 2: 0}
    runs = 0
    for seed in range(30_000):
        res = d2_seed_assign(o, 2, np.random.default_rng(seed))
        if res.landmarks[0] == 0:
            hits[res.landmarks[1]] += 1
            runs += 1
    p = 0.1
    sigma = np.sqrt(runs * p * (1 - p))
    assert abs(hits[1] - runs * p) < 5 * sigma


def test_d2_prefers_infinite_points():
    inf = np.inf
    m = np.array([[0, 1, inf], [1, 0, inf], [inf, inf, 0]])
    for seed in range(50):
        res = d2_seed_assign(MatrixOracle(m), 2, np.random.default_rng(seed))
        if res.landmarks[0] != 2:
            assert res.landmarks[1] == 2


def test_d2_uniform_fallback_on_zero_mass():
    res = d2_seed_assign(MatrixOracle(np.zeros((4, 4))), 3, np.random.default_rng(0))
    assert len(set(res.landmarks)) == 3
    assert res.flags["uniform_fallbacks"] == 2


@pytest.mark.parametrize("seed", range(10))
def test_lloyd_objective_nonincreasing(seed):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(c, 1.0, size=(40, 2)) for c in (0, 4, 8)])
    labels, trace, repaired = lloyd(x, 3, rng)
    assert len(np.unique(labels)) == 3
    if repaired == 0:
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


def test_lloyd_never_leaves_empty_clusters():
    x = np.array([[0.0], [0.0], [0.0], [5.0]])
    for seed in range(20):
        labels, _, _ = lloyd(x, 3, np.random.default_rng(seed))
        assert len(np.unique(labels)) == 3


def test_full_embedding_no_worse_than_small_budget():
    inst = generate_planted(4, 600, TheoryParams(1, 0.004), seed=5)
    o = inst.oracle()
    small, full = [], []
    for seed in range(5):
        small.append(clustering_distance(
            embed_and_kmeans(o, 16, 4, np.random.default_rng(seed)).clustering, inst.target
        ).distance)
        full.append(clustering_distance(
            embed_and_kmeans(o, 600, 4, np.random.default_rng(seed)).clustering, inst.target
        ).distance)
    assert np.median(full) <= np.median(small) + 0.01
