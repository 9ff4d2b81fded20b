"""Landmark selection: repeatedly pick a random point among the q furthest."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .oracle import DistanceOracle


def select_furthest(
    dist: np.ndarray,
    ids: np.ndarray,
    rank: int,
    rng: np.random.Generator,
) -> int:
    """Return the id at 0-based ``rank`` when points are ordered furthest first.

    The order is by ``dist`` descending, then by id ascending, which is a
    strict total order because ids are unique. ``+inf`` sorts as furthest.
    Randomized quickselect, expected linear time; ``rng`` only picks pivots.
    """
    if not 0 <= rank < len(ids):
        raise IndexError(f"rank {rank} out of range for {len(ids)} candidates")
    d = np.asarray(dist)
    i = np.asarray(ids)
    while True:
        m = len(i)
        if m <= 16:
            order = np.lexsort((i, -d))
            return int(i[order[rank]])
        p = rng.integers(m)
        pd, pi = d[p], i[p]
        before = (d > pd) | ((d == pd) & (i < pi))
        n_before = int(np.count_nonzero(before))
        if rank < n_before:
            d, i = d[before], i[before]
        elif rank == n_before:
            return int(pi)
        else:
            after = ~before
            after[p] = False
            d, i = d[after], i[after]
            rank -= n_before + 1


@dataclass
class LandmarkState:
    """Chosen landmarks, their distance rows and each point's distance to
    the nearest landmark."""

    landmarks: list[int] = field(default_factory=list)
    rows: list[np.ndarray] = field(default_factory=list)
    min_dist: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def add(self, landmark: int, row: np.ndarray) -> None:
        self.landmarks.append(int(landmark))
        self.rows.append(row)
        if self.min_dist is None:
            self.min_dist = np.array(row, dtype=np.float64)
        else:
            np.minimum(self.min_dist, row, out=self.min_dist)

    def row_of(self, landmark: int) -> np.ndarray:
        return self.rows[self.landmarks.index(landmark)]


def select_landmarks(
    oracle: DistanceOracle,
    q: int,
    iterations: int,
    rng: np.random.Generator,
    pivot_rng: np.random.Generator | None = None,
    first: int | None = None,
) -> LandmarkState:
    """Choose ``iterations`` distinct landmarks with one query each.

    The first landmark is uniform over all points (or ``first`` when given).
    Each later landmark is uniform over the ``q`` non-landmark points with the
    largest distance to the current landmark set; ties in distance go to the
    smaller id. The window shrinks to the remaining points if fewer than
    ``q`` are left.

    ``rng`` draws landmarks; ``pivot_rng`` drives the selection algorithm and
    never touches ``rng``, so the landmark sequence does not depend on
    quickselect internals.
    """
    n = oracle.n
    if not 1 <= q <= n:
        raise ValueError(f"need 1 <= q <= n, got q={q}, n={n}")
    if not 1 <= iterations <= n:
        raise ValueError(f"cannot select {iterations} distinct landmarks from {n} points")
    if pivot_rng is None:
        pivot_rng = np.random.Generator(np.random.PCG64(rng.integers(2**63)))

    state = LandmarkState()
    s = int(rng.integers(n)) if first is None else int(first)
    state.add(s, oracle.query(s))
    is_landmark = np.zeros(n, dtype=bool)
    is_landmark[s] = True

    for _ in range(iterations - 1):
        candidates = np.flatnonzero(~is_landmark)
        window = min(q, len(candidates))
        rank = int(rng.integers(window))
        s = select_furthest(state.min_dist[candidates], candidates, rank, pivot_rng)
        state.add(s, oracle.query(s))
        is_landmark[s] = True
    return state
