"""Shared domain types, parameter derivation and the seeded RNG contract."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNLABELED = -1

# Named substreams derived from a run seed. Values are part of the
# reproducibility contract; never renumber.
STREAM_SELECTION = 1
STREAM_PIVOT = 2
STREAM_SYNTH = 3
STREAM_BASELINE = 4
STREAM_METRIC = 5
STREAM_RUNS = 6

# Guards ceil() against representation error, e.g. 18 * 0.01 * 1000.
_CEIL_SLACK = 1e-9


class ParameterError(ValueError):
    """Raised for parameter sets that violate the algorithm's bounds."""


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Return a PCG64 generator for ``seed`` and a substream ``path``.

    The generator is numpy's PCG64 seeded through ``SeedSequence`` with
    ``spawn_key=path``, which is stable across platforms and numpy
    releases. Different paths give statistically independent streams.
    """
    if seed < 0 or seed >= 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child 64-bit seed (used for per-run seeds in benchmarks)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def safe_ceil(x: float) -> int:
    return math.ceil(x - _CEIL_SLACK * max(1.0, abs(x)))


@dataclass(frozen=True)
class Clustering:
    """A (possibly partial) assignment of points ``0..n-1`` to ``k`` clusters.

    Absent labels are stored as ``UNLABELED`` (-1).
    """

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if labels.size and (labels.max() >= self.k or labels.min() < UNLABELED):
            raise ValueError(f"labels must lie in [0, {self.k}) or be {UNLABELED}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def is_complete(self) -> bool:
        return bool(np.all(self.labels != UNLABELED))

    @property
    def num_unlabeled(self) -> int:
        return int(np.count_nonzero(self.labels == UNLABELED))

    def sizes(self) -> np.ndarray:
        present = self.labels[self.labels != UNLABELED]
        return np.bincount(present, minlength=self.k)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)

    def clusters(self) -> list[np.ndarray]:
        return [self.members(i) for i in range(self.k)]

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.k, self.labels.tobytes()))

    @classmethod
    def from_labels(cls, labels, k: int | None = None) -> "Clustering":
        labels = np.asarray(labels, dtype=np.int64)
        if k is None:
            k = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 1
        return cls(labels, k)


@dataclass(frozen=True)
class TheoryParams:
    """Stability assumptions: approximation slack ``alpha`` (c = 1 + alpha)
    and closeness fraction ``epsilon``."""

    alpha: float
    epsilon: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if not 0 <= self.epsilon < 1:
            raise ParameterError(f"epsilon must lie in [0, 1), got {self.epsilon}")

    def bad_budget(self, n: int) -> int:
        """Upper bound on the number of bad points, ceil((1 + 17/alpha) * epsilon * n).

        Ceiling rounding keeps the bound conservative for fractional values.
        """
        return safe_ceil((1 + 17 / self.alpha) * self.epsilon * n)

    def min_cluster_size(self, n: int) -> int:
        """Target-cluster size under which the accuracy guarantee is stated."""
        return safe_ceil((4 + 51 / self.alpha) * self.epsilon * n)


@dataclass(frozen=True)
class AlgorithmParams:
    k: int
    q: int
    num_landmarks: int
    s_min: int
    n_prime: int
    seed: int = 0
    origin: dict = field(default_factory=dict, compare=False, hash=False)

    def validate(self, n: int) -> "AlgorithmParams":
        """Check the parameter bounds against a dataset of ``n`` points."""
        checks = [
            (1 <= self.k <= n, f"need 1 <= k <= n, got k={self.k}, n={n}"),
            (1 <= self.q <= n, f"need 1 <= q <= n, got q={self.q}, n={n}"),
            (
                self.k <= self.num_landmarks <= n,
                f"need k <= num_landmarks <= n, got {self.num_landmarks} (k={self.k}, n={n})",
            ),
            (1 <= self.s_min <= n, f"need 1 <= s_min <= n, got s_min={self.s_min}, n={n}"),
            (
                self.k <= self.n_prime <= n,
                f"need k <= n_prime <= n, got n_prime={self.n_prime} (k={self.k}, n={n})",
            ),
            (0 <= self.seed < 2**64, f"seed must be a 64-bit unsigned integer, got {self.seed}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ParameterError(msg)
        return self

    def with_s_min(self, s_min: int) -> "AlgorithmParams":
        return AlgorithmParams(
            self.k, self.q, self.num_landmarks, s_min, self.n_prime, self.seed, dict(self.origin)
        )

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "q": self.q,
            "num_landmarks": self.num_landmarks,
            "s_min": self.s_min,
            "n_prime": self.n_prime,
            "seed": self.seed,
            **({"origin": self.origin} if self.origin else {}),
        }


def derive_params(n: int, k: int, theory: TheoryParams, seed: int = 0) -> AlgorithmParams:
    """Parameters that carry the accuracy guarantee under ``theory``.

    With b = ceil((1 + 17/alpha) * epsilon * n): q = 2b, num_landmarks = 4k,
    s_min = b + 1 and n_prime = n - b.
    """
    if n < 1 or k < 1:
        raise ParameterError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    b = theory.bad_budget(n)
    if b == 0:
        raise ParameterError(
            "bad-point budget is 0 (epsilon too small for n); the selection window q = 2b "
            "must hold at least one point"
        )
    if 2 * b >= n:
        raise ParameterError(f"selection window q = 2b = {2 * b} must be smaller than n = {n}")
    params = AlgorithmParams(
        k=k,
        q=2 * b,
        num_landmarks=4 * k,
        s_min=b + 1,
        n_prime=n - b,
        seed=seed,
        origin={"mode": "theory", "alpha": theory.alpha, "epsilon": theory.epsilon, "b": b},
    )
    return params.validate(n)


def derive_params_practical(
    n: int,
    k: int,
    mu: float,
    s_min_factor: float,
    num_landmarks: int,
    seed: int = 0,
) -> AlgorithmParams:
    """Heuristic parameters for real data with mean target-cluster size ``mu``.

    q = ceil(2 mu), s_min = max(2, ceil(s_min_factor * mu)), n_prime = ceil(n / 2).
    Typical s_min factors are 0.05 for large clusters and 0.1 for small ones.
    """
    if not mu > 0:
        raise ParameterError(f"mu must be > 0, got {mu}")
    if not 0 < s_min_factor < 1:
        raise ParameterError(f"s_min_factor must lie in (0, 1), got {s_min_factor}")
    params = AlgorithmParams(
        k=k,
        q=safe_ceil(2 * mu),
        num_landmarks=num_landmarks,
        s_min=max(2, safe_ceil(s_min_factor * mu)),
        n_prime=safe_ceil(0.5 * n),
        seed=seed,
        origin={"mode": "practical", "mu": mu, "s_min_factor": s_min_factor},
    )
    return params.validate(n)
