"""One-versus-all distance oracles, the query ledger and a triangle-inequality spot check."""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np


class DistanceOracle:
    """Answers one-versus-all queries: ``query(s)`` is the row d(s, .).

    Rows are read-only float64 arrays of length ``n`` with ``row[s] == 0``.
    Entries may be ``+inf`` for pairs with no defined distance.
    """

    n: int

    def query(self, s: int) -> np.ndarray:
        raise NotImplementedError

    def _check_id(self, s: int) -> int:
        s = int(s)
        if not 0 <= s < self.n:
            raise IndexError(f"point id {s} out of range [0, {self.n})")
        return s


class MatrixOracle(DistanceOracle):
    """Serves rows of a precomputed n x n distance matrix.

    Asymmetric input is rejected unless ``symmetrize="max"``, which replaces
    each pair by max(d(i, j), d(j, i)).
    """

    def __init__(self, matrix, symmetrize: str | None = None):
        m = np.array(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {m.shape}")
        if m.shape[0] == 0:
            raise ValueError("distance matrix is empty")
        if np.isnan(m).any():
            raise ValueError("distance matrix contains NaN")
        if (m < 0).any():
            raise ValueError("distance matrix contains negative entries")
        if np.any(np.diagonal(m) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        if not np.array_equal(m, m.T):
            if symmetrize == "max":
                m = np.maximum(m, m.T)
            elif symmetrize is None:
                raise ValueError("distance matrix is not symmetric (pass symmetrize='max')")
            else:
                raise ValueError(f"unknown symmetrize mode {symmetrize!r}")
        m.setflags(write=False)
        self.matrix = m
        self.n = m.shape[0]

    def query(self, s: int) -> np.ndarray:
        return self.matrix[self._check_id(s)]


class EuclideanOracle(DistanceOracle):
    """Euclidean distances between vectors, computed row by row on demand."""

    def __init__(self, points):
        try:
            x = np.array(points, dtype=np.float64)
        except ValueError as exc:
            raise ValueError("points must all have the same dimension") from exc
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
            raise ValueError(f"expected a non-empty (n, m) array of points, got shape {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("point coordinates must be finite")
        x.setflags(write=False)
        self.points = x
        self.n = x.shape[0]

    def query(self, s: int) -> np.ndarray:
        diff = self.points - self.points[self._check_id(s)]
        row = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        row.setflags(write=False)
        return row


@dataclass(frozen=True)
class QueryLedger:
    count: int
    cached_ids: frozenset


class CountingOracle(DistanceOracle):
    """Caching wrapper that counts distinct one-versus-all queries.

    Only cache misses reach the inner oracle and increment the count, so
    the count is the number of distinct points queried so far.
    """

    def __init__(self, inner: DistanceOracle):
        self.inner = inner
        self.n = inner.n
        self._cache: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def query(self, s: int) -> np.ndarray:
        s = self._check_id(s)
        row = self._cache.get(s)
        if row is not None:
            return row
        row = self.inner.query(s)
        with self._lock:
            # a racing thread may have inserted the same row already
            return self._cache.setdefault(s, row)

    def cached(self, s: int) -> np.ndarray:
        """Return a previously queried row without issuing a query."""
        try:
            return self._cache[int(s)]
        except KeyError:
            raise KeyError(f"point {s} has not been queried") from None

    @property
    def count(self) -> int:
        return len(self._cache)

    def ledger(self) -> QueryLedger:
        with self._lock:
            return QueryLedger(len(self._cache), frozenset(self._cache))


def counting(oracle: DistanceOracle) -> CountingOracle:
    return oracle if isinstance(oracle, CountingOracle) else CountingOracle(oracle)


def full_matrix(oracle: DistanceOracle) -> np.ndarray:
    """Materialize all rows (evaluation only; bypasses query budgets)."""
    if isinstance(oracle, MatrixOracle):
        return oracle.matrix
    if isinstance(oracle, CountingOracle):
        return full_matrix(oracle.inner)
    return np.vstack([oracle.query(s) for s in range(oracle.n)])


@dataclass(frozen=True)
class MetricCheckReport:
    triples_sampled: int
    violations: int
    worst_slack: float
    finite_triples: int

    def as_dict(self) -> dict:
        return {
            "triples_sampled": self.triples_sampled,
            "violations": self.violations,
            "worst_slack": self.worst_slack,
            "finite_triples": self.finite_triples,
        }


def sample_triples(n: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform triples of distinct ids, drawn independently (with replacement)."""
    a = rng.integers(0, n, size=samples)
    b = rng.integers(0, n - 1, size=samples)
    b = b + (b >= a)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    c = rng.integers(0, n - 2, size=samples)
    c = c + (c >= lo)
    c = c + (c >= hi)
    return np.stack([a, b, c], axis=1)


def check_triangle(
    oracle: DistanceOracle,
    samples: int,
    rng: np.random.Generator,
    rtol: float = 1e-12,
) -> MetricCheckReport:
    """Spot-check the triangle inequality on randomly drawn triples.

    A triple counts as violating if any of its three inequalities fails.
    Inequalities involving +inf are skipped: ``inf <= inf + x`` holds and a
    finite side can never exceed an infinite sum. ``worst_slack`` is the
    largest d(a, c) - d(a, b) - d(b, c) over all finite orientations, or
    ``-inf`` when no sampled triple was fully finite. Slack up to
    ``rtol * (d(a, b) + d(b, c))`` is treated as rounding error.
    """
    n = oracle.n
    if n < 3:
        raise ValueError("triangle check needs at least 3 points")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    triples = sample_triples(n, samples, rng)

    # group by first vertex so each row is fetched once
    dab = np.empty(samples)
    dbc = np.empty(samples)
    dac = np.empty(samples)
    order = np.argsort(triples[:, 0], kind="stable")
    sorted_a = triples[order, 0]
    bounds = np.flatnonzero(np.diff(sorted_a)) + 1
    for idx in np.split(order, bounds):
        row = oracle.query(triples[idx[0], 0])
        dab[idx] = row[triples[idx, 1]]
        dac[idx] = row[triples[idx, 2]]
    order = np.argsort(triples[:, 1], kind="stable")
    bounds = np.flatnonzero(np.diff(triples[order, 1])) + 1
    for idx in np.split(order, bounds):
        row = oracle.query(triples[idx[0], 1])
        dbc[idx] = row[triples[idx, 2]]

    finite = np.isfinite(dab) & np.isfinite(dbc) & np.isfinite(dac)
    dab, dbc, dac = dab[finite], dbc[finite], dac[finite]
    slack = np.stack([dac - dab - dbc, dab - dac - dbc, dbc - dab - dac], axis=1)
    rhs_scale = np.stack([dab + dbc, dac + dbc, dab + dac], axis=1)
    violated = (slack > rtol * rhs_scale).any(axis=1)
    worst = float(slack.max()) if slack.size else float("-inf")
    return MetricCheckReport(
        triples_sampled=samples,
        violations=int(violated.sum()),
        worst_slack=worst,
        finite_triples=int(finite.sum()),
    )
