import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_min_dist, farthest_first, furthest_order

from lmclust.core import rng_stream
from lmclust.oracle import CountingOracle, EuclideanOracle, MatrixOracle, full_matrix
from lmclust.selection import select_furthest, select_landmarks

INF = float("inf")


@given(
    dist=st.lists(
        st.one_of(st.sampled_from([0.0, 1.0, 2.0, INF]), st.floats(0, 100)),
        min_size=1,
        max_size=80,
    ),
    data=st.data(),
)
@settings(max_examples=300, deadline=None)
def test_select_furthest_matches_sort(dist, data):
    ids = np.array(data.draw(st.permutations(range(len(dist)))))
    rank = data.draw(st.integers(0, len(dist) - 1))
    expected = furthest_order(dist, ids)[rank]
    got = select_furthest(np.array(dist), ids, rank, np.random.default_rng(rank))
    assert got == expected


def test_select_furthest_large_all_ranks():
    rng = np.random.default_rng(0)
    d = rng.integers(0, 20, size=300).astype(float)
    ids = np.arange(300)
    order = furthest_order(d, ids)
    for r in (0, 1, 50, 150, 299):
        assert select_furthest(d, ids, r, rng) == order[r]


def test_select_furthest_rank_range():
    with pytest.raises(IndexError):
        select_furthest(np.zeros(3), np.arange(3), 3, np.random.default_rng())


def test_farthest_pick_on_line():
    # points 0, 1, 10; with q = 1 the second landmark is the unique furthest
    o = EuclideanOracle([[0.0], [1.0], [10.0]])
    st_ = select_landmarks(o, q=1, iterations=2, rng=rng_stream(0, 1), first=0)
    assert st_.landmarks == [0, 2]


def test_single_iteration():
    o = EuclideanOracle(np.arange(5.0))
    s = select_landmarks(o, q=2, iterations=1, rng=rng_stream(3, 1))
    assert len(s.landmarks) == 1
    assert np.array_equal(s.min_dist, o.query(s.landmarks[0]))


@pytest.fixture(scope="module")
def cloud():
    return EuclideanOracle(np.random.default_rng(2).normal(size=(60, 3)))


def test_min_dist_matches_brute_force(cloud):
    s = select_landmarks(cloud, q=10, iterations=12, rng=rng_stream(9, 1))
    assert len(set(s.landmarks)) == 12
    m = full_matrix(cloud)
    assert np.array_equal(s.min_dist, brute_min_dist([m[l] for l in s.landmarks]))
    assert np.all(s.min_dist[s.landmarks] == 0)


def test_q1_is_farthest_first(cloud):
    s = select_landmarks(cloud, q=1, iterations=10, rng=rng_stream(4, 1))
    assert s.landmarks == farthest_first(full_matrix(cloud), s.landmarks[0], 10)


def test_each_iteration_costs_one_query(cloud):
    for it in (1, 2, 7):
        o = CountingOracle(cloud)
        select_landmarks(o, q=5, iterations=it, rng=rng_stream(1, 1))
        assert o.count == it


def test_deterministic_and_pivot_independent(cloud):
    a = select_landmarks(cloud, 8, 10, rng_stream(5, 1), pivot_rng=rng_stream(5, 2))
    b = select_landmarks(cloud, 8, 10, rng_stream(5, 1), pivot_rng=rng_stream(99, 2))
    assert a.landmarks == b.landmarks


def test_window_draws_only_from_q_furthest(cloud):
    m = full_matrix(cloud)
    for seed in range(30):
        s = select_landmarks(cloud, q=4, iterations=5, rng=rng_stream(seed, 1))
        for i in range(1, 5):
            md = m[s.landmarks[:i]].min(axis=0)
            cand = [p for p in range(60) if p not in s.landmarks[:i]]
            assert s.landmarks[i] in furthest_order(md[cand], cand)[:4]


def test_window_clipped_to_remaining_points():
    o = EuclideanOracle(np.arange(4.0))
    s = select_landmarks(o, q=4, iterations=4, rng=rng_stream(0, 1))
    assert sorted(s.landmarks) == [0, 1, 2, 3]


def test_too_many_iterations():
    with pytest.raises(ValueError):
        select_landmarks(EuclideanOracle(np.arange(3.0)), 1, 4, rng_stream(0, 1))


def test_infinite_min_dist_is_furthest():
    m = np.array([[0, 1, INF], [1, 0, 2], [INF, 2, 0]])
    s = select_landmarks(MatrixOracle(m), q=1, iterations=2, rng=rng_stream(0, 1), first=0)
    assert s.landmarks == [0, 2]


def test_second_landmark_uniform_when_window_is_everything():
    n, runs = 10, 10_000
    o = CountingOracle(EuclideanOracle(np.random.default_rng(8).normal(size=(n, 2))))
    counts = np.zeros(n, dtype=int)
    for seed in range(runs):
        s = select_landmarks(o, q=n, iterations=2, rng=rng_stream(seed, 1), first=0)
        counts[s.landmarks[1]] += 1
    assert counts[0] == 0
    p = 1 / (n - 1)
    sigma = np.sqrt(runs * p * (1 - p))
    assert np.all(np.abs(counts[1:] - runs * p) < 5 * sigma)
