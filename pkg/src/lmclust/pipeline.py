"""End-to-end landmark clustering: select, expand, then reassign every point."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import STREAM_PIVOT, STREAM_SELECTION, AlgorithmParams, Clustering, rng_stream
from .expansion import NoCluster, component_landmark_reps, expand_landmarks
from .oracle import DistanceOracle, counting
from .selection import select_landmarks


@dataclass
class RunReport:
    clustering: Clustering
    queries_used: int
    radius_at_termination: float
    unclustered_before_reassign: int
    params: AlgorithmParams
    reps: list[int]
    landmarks: list[int]
    wall_time_ms: float = 0.0

    @property
    def seed(self) -> int:
        return self.params.seed

    def payload(self) -> dict:
        """Reproducible part of the report (no timing)."""
        return {
            "params": self.params.as_dict(),
            "seed": self.seed,
            "queries_used": self.queries_used,
            "radius_at_termination": self.radius_at_termination,
            "unclustered_before_reassign": self.unclustered_before_reassign,
            "cluster_sizes": self.clustering.sizes().tolist(),
            "reps": self.reps,
            "landmarks": self.landmarks,
        }


def reassign_to_reps(reps, rep_rows) -> Clustering:
    """Label each point with the index of its nearest representative.

    Ties go to the smaller index (``argmin`` returns the first minimum).
    """
    if len(reps) != len(rep_rows):
        raise ValueError(f"{len(reps)} reps but {len(rep_rows)} rows")
    if len(set(reps)) != len(reps):
        raise ValueError("representatives must be distinct")
    if any(r is None for r in rep_rows):
        raise ValueError("missing distance row for a representative")
    stacked = np.vstack(rep_rows)
    return Clustering(np.argmin(stacked, axis=0), len(reps))


def landmark_clustering(oracle: DistanceOracle, params: AlgorithmParams) -> RunReport | NoCluster:
    """Cluster with ``params.num_landmarks`` one-versus-all queries.

    Every point, including those already clustered by the sweep, is finally
    assigned to the nearest of one landmark per cluster. That step reuses
    the landmarks' rows and issues no further queries.
    """
    t0 = time.perf_counter()
    oracle = counting(oracle)
    start = oracle.count
    params.validate(oracle.n)
    state = select_landmarks(
        oracle,
        params.q,
        params.num_landmarks,
        rng_stream(params.seed, STREAM_SELECTION),
        pivot_rng=rng_stream(params.seed, STREAM_PIVOT),
    )
    pc = expand_landmarks(state, params.s_min, params.n_prime, params.k)
    if isinstance(pc, NoCluster):
        pc.diagnostics["queries_used"] = oracle.count - start
        return pc
    reps = component_landmark_reps(pc)
    clustering = reassign_to_reps(reps, [oracle.cached(r) for r in reps])
    return RunReport(
        clustering=clustering,
        queries_used=oracle.count - start,
        radius_at_termination=pc.radius,
        unclustered_before_reassign=pc.clustering.num_unlabeled,
        params=params,
        reps=reps,
        landmarks=list(state.landmarks),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )
