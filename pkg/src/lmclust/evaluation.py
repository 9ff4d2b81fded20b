"""Clustering distance under optimal matching, k-median cost, brute-force
optimum for tiny instances, and good/bad point classification."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Clustering, ParameterError, TheoryParams
from .oracle import DistanceOracle, full_matrix


@dataclass
class MatchingResult:
    distance: float
    permutation: list[int]  # cluster i of a is matched to cluster permutation[i] of b
    overlap: np.ndarray
    padded: bool = False

    def as_dict(self) -> dict:
        return {
            "distance": self.distance,
            "permutation": self.permutation,
            "overlap": self.overlap.tolist(),
            "padded": self.padded,
        }


def overlap_matrix(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (a, b), 1)
    return counts


def clustering_distance(a: Clustering, b: Clustering) -> MatchingResult:
    """Fraction of points on which ``a`` and ``b`` disagree under the best
    one-to-one matching of their clusters.

    Solved as a maximum-overlap assignment problem. When the cluster counts
    differ, the smaller clustering is padded with empty clusters and the
    result is flagged as ``padded``.
    """
    if a.n != b.n:
        raise ValueError(f"clusterings cover different point counts ({a.n} vs {b.n})")
    if not (a.is_complete and b.is_complete):
        raise ValueError("clustering_distance needs complete clusterings")
    k = max(a.k, b.k)
    overlap = overlap_matrix(a.labels, b.labels, k)
    rows, cols = linear_sum_assignment(overlap, maximize=True)
    agreed = int(overlap[rows, cols].sum())
    perm = [int(c) for c in cols[np.argsort(rows)]]
    return MatchingResult(
        distance=(a.n - agreed) / a.n if a.n else 0.0,
        permutation=perm,
        overlap=overlap,
        padded=a.k != b.k,
    )


@dataclass
class KMedianValue:
    cost: float
    medians: list[int | None]
    empty_clusters: list[int]


def _as_matrix(source) -> np.ndarray:
    if isinstance(source, DistanceOracle):
        return full_matrix(source)
    return np.asarray(source, dtype=np.float64)


def _median_of(members: np.ndarray, dist: np.ndarray) -> tuple[int, float]:
    sums = dist[np.ix_(members, members)].sum(axis=1)
    best = int(np.argmin(sums))  # members ascending, so first minimum is the smallest id
    return int(members[best]), float(sums[best])


def kmedian_cost(c: Clustering, source: DistanceOracle | np.ndarray) -> KMedianValue:
    """k-median objective of ``c``: each cluster's best member as its median.

    Needs every row of the clustered points, so this is an evaluation tool and
    does not go through a query budget. Empty clusters contribute 0 and are
    listed in ``empty_clusters``.
    """
    if not c.is_complete:
        raise ValueError("k-median cost needs a complete clustering")
    dist = _as_matrix(source)
    cost = 0.0
    medians: list[int | None] = []
    empty = []
    for i in range(c.k):
        members = c.members(i)
        if members.size == 0:
            medians.append(None)
            empty.append(i)
            continue
        med, s = _median_of(members, dist)
        medians.append(med)
        cost += s
    return KMedianValue(cost, medians, empty)


def brute_force_kmedian(
    source: DistanceOracle | np.ndarray, k: int, cap: int = 16
) -> tuple[Clustering, KMedianValue]:
    """Exact k-median optimum by enumerating every set of k centers.

    Each point joins its nearest center (smaller center id on ties). Among
    equal-cost center sets the lexicographically first wins.
    """
    dist = _as_matrix(source)
    n = dist.shape[0]
    if n > cap:
        raise ValueError(f"brute force refused: n={n} exceeds cap {cap}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    best_cost, best_centers = np.inf, None
    for centers in itertools.combinations(range(n), k):
        cost = dist[list(centers)].min(axis=0).sum()
        if cost < best_cost or best_centers is None:
            best_cost, best_centers = cost, centers
    labels = np.argmin(dist[list(best_centers)], axis=0)
    clustering = Clustering(labels, k)
    return clustering, kmedian_cost(clustering, dist)


@dataclass
class PointAnalysis:
    """Per-point structure relative to the medians of a reference clustering."""

    medians: list[int]
    w: np.ndarray  # distance to the nearest median
    w2: np.ndarray  # distance to the second-nearest median
    avg_weight: float
    d_crit: float
    good: np.ndarray
    detectable: np.ndarray
    good_set_sizes: list[int]
    bad_count: int
    b: int
    max_core_radius: float
    max_core_diameter: float | None = None
    min_inter_core_distance: float | None = None

    def as_dict(self) -> dict:
        return {
            "medians": self.medians,
            "avg_weight": self.avg_weight,
            "d_crit": self.d_crit,
            "good_set_sizes": self.good_set_sizes,
            "bad_count": self.bad_count,
            "b": self.b,
            "detectable_count": int(self.detectable.sum()),
            "max_core_radius": self.max_core_radius,
            "max_core_diameter": self.max_core_diameter,
            "min_inter_core_distance": self.min_inter_core_distance,
        }

    def invariant_failures(self) -> list[str]:
        """Structural conditions the landmark algorithm relies on, as failures."""
        out = []
        if self.bad_count > self.b:
            out.append(f"bad count {self.bad_count} exceeds budget b={self.b}")
        small = [s for s in self.good_set_sizes if s < 2 * self.b]
        if small:
            out.append(f"good set sizes {small} below 2b={2 * self.b}")
        if not self.max_core_radius < 2 * self.d_crit:
            out.append(f"core radius {self.max_core_radius} not below 2*d_crit")
        if self.max_core_diameter is not None and not self.max_core_diameter < 2 * self.d_crit:
            out.append(f"core diameter {self.max_core_diameter} not below 2*d_crit")
        if (
            self.min_inter_core_distance is not None
            and not self.min_inter_core_distance > 16 * self.d_crit
        ):
            out.append(f"inter-core distance {self.min_inter_core_distance} not above 16*d_crit")
        return out


def classify_points(
    source: DistanceOracle | np.ndarray,
    target: Clustering,
    theory: TheoryParams,
    separation: bool = True,
) -> PointAnalysis:
    """Split points into good and bad relative to ``target``'s medians.

    The medians stand in for the optimal k-median centers. With w the
    distance to the nearest median and w2 to the second nearest,
    d_crit = alpha * mean(w) / (17 * epsilon); a point is good when
    w < d_crit and w2 - w >= 17 * d_crit, detectable when the second
    condition holds. Good set i is the good points carrying target label i.

    With ``separation`` the within-core diameter and the smallest distance
    between different cores are computed too (quadratic in n).
    """
    if target.k < 2:
        raise ValueError("classification needs k >= 2 (no second-nearest center)")
    if theory.epsilon <= 0:
        raise ParameterError("classification needs epsilon > 0")
    if not target.is_complete:
        raise ValueError("target clustering must be complete")
    dist = _as_matrix(source)
    n = target.n
    km = kmedian_cost(target, dist)
    if km.empty_clusters:
        raise ValueError(f"target has empty clusters {km.empty_clusters}")
    medians = [int(m) for m in km.medians]
    to_medians = np.sort(dist[medians], axis=0)
    w, w2 = to_medians[0], to_medians[1]
    avg = float(w.mean())
    d_crit = theory.alpha * avg / (17 * theory.epsilon)
    with np.errstate(invalid="ignore"):
        detectable = (w2 - w) >= 17 * d_crit
    good = (w < d_crit) & detectable
    good_sizes = np.bincount(target.labels[good], minlength=target.k)
    analysis = PointAnalysis(
        medians=medians,
        w=w,
        w2=w2,
        avg_weight=avg,
        d_crit=d_crit,
        good=good,
        detectable=detectable,
        good_set_sizes=good_sizes.tolist(),
        bad_count=int(n - good.sum()),
        b=theory.bad_budget(n),
        max_core_radius=float(w[good].max()) if good.any() else 0.0,
    )
    if separation:
        diam, inter = _core_separation(dist, target.labels, good)
        analysis.max_core_diameter = diam
        analysis.min_inter_core_distance = inter
    return analysis


def _core_separation(dist, labels, good, block: int = 512):
    idx = np.flatnonzero(good)
    if idx.size == 0:
        return 0.0, float("inf")
    lab = labels[idx]
    max_intra, min_inter = 0.0, float("inf")
    for start in range(0, idx.size, block):
        rows = idx[start : start + block]
        sub = dist[np.ix_(rows, idx)]
        same = lab[start : start + block, None] == lab[None, :]
        if same.any():
            max_intra = max(max_intra, float(sub[same].max()))
        if (~same).any():
            min_inter = min(min_inter, float(sub[~same].min()))
    return max_intra, min_inter

