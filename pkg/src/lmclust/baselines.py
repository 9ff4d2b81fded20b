"""Comparison methods that use the same kind of query budget.

* ``embed_and_kmeans``: embed every point by its distances to d random
  landmarks and run Lloyd's k-means (k-means++ seeding) in that space.
* ``d2_seed_assign``: pick k centers by D^2 sampling from the queried rows,
  then assign each point to its nearest center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Clustering
from .oracle import DistanceOracle, counting

INF_SENTINEL_FACTOR = 10.0


@dataclass
class BaselineResult:
    clustering: Clustering
    queries_used: int
    landmarks: list[int]
    flags: dict = field(default_factory=dict)
    objective_trace: list[float] = field(default_factory=list)


def embed(rows: list[np.ndarray]) -> tuple[np.ndarray, bool]:
    """Stack landmark rows into an (n, d) embedding.

    +inf entries become 10x the largest finite distance; the flag reports
    whether any replacement happened.
    """
    x = np.vstack(rows).T.astype(np.float64, copy=True)
    inf = ~np.isfinite(x)
    if inf.any():
        finite = x[~inf]
        top = float(finite.max()) if finite.size else 1.0
        x[inf] = INF_SENTINEL_FACTOR * (top if top > 0 else 1.0)
    return x, bool(inf.any())


def kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _sq_dists(x, centers):
    out = np.empty((x.shape[0], len(centers)))
    for j, c in enumerate(centers):
        diff = x - c
        out[:, j] = np.einsum("ij,ij->i", diff, diff)
    return out


def lloyd(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 100):
    """Lloyd iterations from k-means++ seeds until the assignment stops changing.

    Returns ``(labels, objective_trace, repaired)`` where ``repaired`` counts
    empty clusters that were reseeded at the point furthest from its center.
    """
    centers = kmeans_pp_init(x, k, rng)
    labels = np.argmin(_sq_dists(x, centers), axis=1)
    trace = []
    repaired = 0
    for _ in range(max_iter):
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            d = _sq_dists(x, centers)[np.arange(len(x)), labels]
            d[counts[labels] <= 1] = -1.0  # never empty another cluster
            far = int(np.argmax(d))
            counts[labels[far]] -= 1
            counts[j] += 1
            labels[far] = j
            repaired += 1
        for j in range(k):
            centers[j] = x[labels == j].mean(axis=0)
        d = _sq_dists(x, centers)
        new = np.argmin(d, axis=1)
        rows = np.arange(len(x))
        # a point tied with its current center stays put, so repairs stick
        new = np.where(d[rows, labels] <= d[rows, new], labels, new)
        trace.append(float(d[np.arange(len(x)), labels].sum()))
        if np.array_equal(new, labels):
            break
        labels = new
    return labels, trace, repaired


def embed_and_kmeans(
    oracle: DistanceOracle, d: int, k: int, rng: np.random.Generator, max_iter: int = 100
) -> BaselineResult:
    """k-means on the embedding given by ``d`` uniformly chosen landmarks.

    Uses exactly ``d`` one-versus-all queries.
    """
    oracle = counting(oracle)
    n = oracle.n
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    start = oracle.count
    landmarks = sorted(int(i) for i in rng.choice(n, size=d, replace=False))
    x, replaced = embed([oracle.query(l) for l in landmarks])
    labels, trace, repaired = lloyd(x, k, rng, max_iter)
    return BaselineResult(
        clustering=Clustering(labels, k),
        queries_used=oracle.count - start,
        landmarks=landmarks,
        flags={"inf_replaced": replaced, "empty_repairs": repaired, "init": "k-means++"},
        objective_trace=trace,
    )


def d2_seed_assign(oracle: DistanceOracle, k: int, rng: np.random.Generator) -> BaselineResult:
    """D^2 seeding with k queries followed by nearest-center assignment.

    The first center is uniform; each next one is drawn with probability
    proportional to the squared distance to the nearest chosen center. If
    some unchosen points are at +inf from every center the draw is uniform
    among them; if all remaining mass is zero it is uniform among the
    unchosen points. Ties in the final assignment go to the earlier center.
    """
    oracle = counting(oracle)
    n = oracle.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    start = oracle.count
    chosen = [int(rng.integers(n))]
    rows = [oracle.query(chosen[0])]
    min_d = np.array(rows[0], dtype=np.float64)
    fallback = 0
    for _ in range(1, k):
        free = np.ones(n, dtype=bool)
        free[chosen] = False
        inf_pts = np.flatnonzero(free & np.isinf(min_d))
        if inf_pts.size:
            nxt = int(rng.choice(inf_pts))
        else:
            w = np.where(free, min_d**2, 0.0)
            total = w.sum()
            if total > 0:
                nxt = int(rng.choice(n, p=w / total))
            else:
                nxt = int(rng.choice(np.flatnonzero(free)))
                fallback += 1
        chosen.append(nxt)
        rows.append(oracle.query(nxt))
        np.minimum(min_d, rows[-1], out=min_d)
    labels = np.argmin(np.vstack(rows), axis=0)
    return BaselineResult(
        clustering=Clustering(labels, k),
        queries_used=oracle.count - start,
        landmarks=chosen,
        flags={"uniform_fallbacks": fallback},
    )
