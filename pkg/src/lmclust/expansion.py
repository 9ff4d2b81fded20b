"""Grow balls around all landmarks at a common radius until the overlap
graph of sufficiently large balls has exactly k components."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .core import UNLABELED, Clustering
from .selection import LandmarkState


class DisjointSet:
    """Union-find over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; return False if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


class _SortedRow:
    """A landmark row revealed in (distance, point id) order, a prefix at a time.

    The sweep usually stops long before it has looked at every pair, so rows
    are not sorted up front. The prefix holds every point at or below a
    threshold distance, ordered by (distance, point id); it starts small and
    doubles on demand. Because the threshold prefix of a total order is a
    prefix of that order, positions already handed out stay valid.
    """

    INITIAL = 256

    def __init__(self, row):
        self.row = np.asarray(row, dtype=np.float64)
        self.finite = int(np.count_nonzero(np.isfinite(self.row)))
        self.dists: list[float] = []
        self.points: list[int] = []
        if self.finite:
            self._extend(min(self.INITIAL, self.finite))

    def _extend(self, want: int) -> None:
        row = self.row
        if want >= self.finite:
            cand = np.flatnonzero(np.isfinite(row))
        else:
            cut = np.partition(row, want - 1)[want - 1]
            cand = np.flatnonzero(row <= cut)  # ascending ids, ties at the cut included
        order = cand[np.argsort(row[cand], kind="stable")]
        self.dists = row[order].tolist()
        self.points = order.tolist()

    def has(self, pos: int) -> bool:
        if pos < len(self.dists):
            return True
        if len(self.dists) >= self.finite:
            return False
        self._extend(min(2 * len(self.dists), self.finite))
        return pos < len(self.dists)


class PairStream:
    """Landmark-point pairs in ascending (distance, landmark ordinal, point id) order.

    Each landmark's row is revealed in sorted order on demand; a heap holding
    one cursor per landmark merges them, so a pop costs O(log |L|) plus the
    amortized cost of extending that row's sorted prefix. Pairs at +inf are
    never produced.
    """

    def __init__(self, rows):
        self._rows = [_SortedRow(r) for r in rows]
        heap = [(r.dists[0], ordinal, 0) for ordinal, r in enumerate(self._rows) if r.finite]
        heapq.heapify(heap)
        self._heap = heap

    def __iter__(self):
        return self

    def __next__(self) -> tuple[float, int, int]:
        heap = self._heap
        if not heap:
            raise StopIteration
        d, ordinal, pos = heap[0]
        row = self._rows[ordinal]
        nxt = pos + 1
        if row.has(nxt):
            heapq.heapreplace(heap, (row.dists[nxt], ordinal, nxt))
        else:
            heapq.heappop(heap)
        return d, ordinal, row.points[pos]

    def __len__(self) -> int:
        return sum(r.finite for r in self._rows)


@dataclass
class PartialClustering:
    """Clusters found by the sweep; points in no active ball stay unlabeled.

    ``cluster_landmarks[i]`` lists the ordinals of the active landmarks in
    cluster i, ascending. Clusters are numbered by their smallest ordinal.
    """

    clustering: Clustering
    cluster_landmarks: list[list[int]]
    landmark_ids: list[int]
    radius: float
    pops: int


@dataclass
class NoCluster:
    """The sweep ended without k components covering n_prime points."""

    reason: str
    pops: int = 0
    max_components_covered: int | None = None
    min_components_covered: int | None = None
    max_components: int = 0
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "reason": self.reason,
            "pops": self.pops,
            "max_components_covered": self.max_components_covered,
            "min_components_covered": self.min_components_covered,
            "max_components": self.max_components,
            **self.diagnostics,
        }


def expand_landmarks(
    landmarks: LandmarkState | list[np.ndarray],
    s_min: int,
    n_prime: int,
    k: int,
    landmark_ids: list[int] | None = None,
) -> PartialClustering | NoCluster:
    """Sweep the ball radius over all landmark-point pairs in order.

    After every single pop the test "exactly k components among balls with
    at least ``s_min`` points, and at least ``n_prime`` points covered by
    those balls" is evaluated; the first pass returns the components as
    clusters.
    """
    if isinstance(landmarks, LandmarkState):
        rows, landmark_ids = landmarks.rows, landmarks.landmarks
    else:
        rows = list(landmarks)
        if landmark_ids is None:
            landmark_ids = [int(np.flatnonzero(np.asarray(r) == 0)[0]) for r in rows]
    if not rows:
        raise ValueError("need at least one landmark")
    if s_min < 1:
        raise ValueError(f"s_min must be >= 1, got {s_min}")
    n = len(rows[0])
    if n_prime > n:
        raise ValueError(f"n_prime={n_prime} exceeds n={n}")
    num_l = len(rows)

    size = [0] * num_l
    members: list[list[int]] = [[] for _ in range(num_l)]
    active = [False] * num_l
    owner = [-1] * n  # some active landmark whose ball holds the point
    dsu = DisjointSet(num_l)
    components = 0
    clustered = 0
    pops = 0
    max_cov = min_cov = None
    max_components = 0

    for d, l, p in PairStream(rows):
        pops += 1
        size[l] += 1
        if active[l]:
            o = owner[p]
            if o < 0:
                owner[p] = l
                clustered += 1
            elif dsu.union(o, l):
                components -= 1
        else:
            members[l].append(p)
            if size[l] >= s_min:
                active[l] = True
                components += 1
                for m in members[l]:
                    o = owner[m]
                    if o < 0:
                        owner[m] = l
                        clustered += 1
                    elif dsu.union(o, l):
                        components -= 1
                members[l] = []
        if components > max_components:
            max_components = components
        if clustered >= n_prime:
            if components == k:
                return _build(owner, active, dsu, k, landmark_ids, d, pops)
            if max_cov is None or components > max_cov:
                max_cov = components
            if min_cov is None or components < min_cov:
                min_cov = components

    if not any(active):
        reason = "no ball ever activated"
    elif max_cov is None:
        reason = "active balls never covered n_prime points"
    else:
        reason = f"never exactly {k} components while covering n_prime points"
    return NoCluster(
        reason=reason,
        pops=pops,
        max_components_covered=max_cov,
        min_components_covered=min_cov,
        max_components=max_components,
        diagnostics={"k": k, "s_min": s_min, "n_prime": n_prime},
    )


def _build(owner, active, dsu, k, landmark_ids, radius, pops) -> PartialClustering:
    by_root: dict[int, list[int]] = {}
    for l, is_active in enumerate(active):
        if is_active:
            by_root.setdefault(dsu.find(l), []).append(l)
    # ordinals are appended in ascending order, so [0] is each component's minimum
    groups = sorted(by_root.values(), key=lambda g: g[0])
    assert len(groups) == k
    label_of_root = {dsu.find(g[0]): i for i, g in enumerate(groups)}
    owner = np.asarray(owner)
    labels = np.full(len(owner), UNLABELED, dtype=np.int64)
    for idx in np.flatnonzero(owner >= 0):
        labels[idx] = label_of_root[dsu.find(int(owner[idx]))]
    return PartialClustering(
        clustering=Clustering(labels, k),
        cluster_landmarks=groups,
        landmark_ids=list(landmark_ids),
        radius=float(radius),
        pops=pops,
    )


def component_landmark_reps(pc: PartialClustering) -> list[int]:
    """One representative landmark id per cluster: the smallest ordinal."""
    reps = []
    for i, ordinals in enumerate(pc.cluster_landmarks):
        assert ordinals, f"cluster {i} has no landmark"
        reps.append(pc.landmark_ids[min(ordinals)])
    return reps
