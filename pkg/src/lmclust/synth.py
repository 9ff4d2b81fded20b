"""Planted instances with well-separated cluster cores and a recomputed
certificate of their structure."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import fileio
from .core import STREAM_SYNTH, Clustering, TheoryParams, rng_stream
from .evaluation import PointAnalysis, classify_points
from .oracle import EuclideanOracle, full_matrix

GENERATOR_VERSION = "planted-1"


class GeometryError(ValueError):
    """The requested planted geometry cannot be realized."""


@dataclass(frozen=True)
class Geometry:
    """Layout knobs, all distances in units of the target critical distance.

    Core points lie within ``core_radius_factor`` of their center, centers
    are at least ``separation_factor`` apart, and bad points sit at radii in
    ``bad_radius`` from their own center.
    """

    core_radius_factor: float = 0.9
    separation_factor: float = 24.0
    bad_fraction: float = 0.005
    bad_radius: tuple[float, float] = (1.5, 4.0)
    dim: int = 8


@dataclass
class PlantedInstance:
    points: np.ndarray
    target: Clustering
    theory: TheoryParams
    certificate: dict
    seed: int
    centers: np.ndarray = field(repr=False, default=None)
    _matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def oracle(self) -> EuclideanOracle:
        return EuclideanOracle(self.points)

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = full_matrix(self.oracle())
        return self._matrix


def _place_centers(k, dim, min_sep, rng, tries=2000):
    # cube side chosen so that k balls of radius min_sep/2 fill ~1/8 of it
    side = min_sep * max(1.0, 2.0 * k ** (1.0 / dim))
    centers = []
    for _ in range(k):
        for _ in range(tries):
            c = rng.uniform(0.0, side, size=dim)
            if all(np.linalg.norm(c - o) >= min_sep for o in centers):
                centers.append(c)
                break
        else:
            raise GeometryError(
                f"could not place {k} centers {min_sep} apart in dimension {dim}"
            )
    return np.array(centers)


def _unit_directions(m, dim, rng):
    v = rng.standard_normal((m, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return v / norms


def _cluster_sizes(n, k):
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    return sizes


def _layout(k, n, geom, rng):
    """Centers, per-point unit-scale offsets and labels for one draw."""
    sizes = _cluster_sizes(n, k)
    n_bad = int(round(geom.bad_fraction * n))
    labels = np.repeat(np.arange(k), sizes)
    # bad points go round-robin over clusters, taken from the end of each block
    bad = np.zeros(n, dtype=bool)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    per_cluster = np.bincount(np.arange(n_bad) % k, minlength=k)
    for i in range(k):
        if per_cluster[i] > sizes[i] - 1:
            raise GeometryError(f"cluster {i} cannot hold {per_cluster[i]} bad points")
        end = starts[i] + sizes[i]
        bad[end - per_cluster[i] : end] = True

    centers = _place_centers(k, geom.dim, geom.separation_factor, rng)
    dirs = _unit_directions(n, geom.dim, rng)
    # uniform in the unit ball; first point of each cluster sits at the center
    radii = rng.uniform(size=n) ** (1.0 / geom.dim)
    radii[starts] = 0.0
    lo, hi = geom.bad_radius
    radii[bad] = rng.uniform(lo, hi, size=int(bad.sum()))
    return centers, dirs, radii, labels, bad


def _assemble(centers, dirs, radii, labels, bad, core_scale):
    r = np.where(bad, radii, radii * core_scale)
    return centers[labels] + dirs * r[:, None]


def generate_planted(
    k: int,
    n: int,
    theory: TheoryParams,
    geometry: Geometry | None = None,
    seed: int = 0,
    certify: bool = True,
    max_attempts: int = 5,
) -> PlantedInstance:
    """Draw a Euclidean instance whose target clusters have good cores.

    The unit of length is the target critical distance. Bad-point radii are
    fixed in that unit; core radii are scaled so that the mean distance to
    the planted centers puts the critical distance at exactly 1. With
    ``certify`` the structure is then recomputed from the target's medians
    by ``classify_points``; if the realized critical distance is off by more
    than 10% the core scale is corrected once, and draws whose certificate
    still fails are retried with fresh randomness.
    """
    geom = geometry or Geometry()
    if k < 1 or n < k:
        raise GeometryError(f"need 1 <= k <= n, got k={k}, n={n}")
    if theory.epsilon <= 0:
        raise GeometryError("planted instances need epsilon > 0")
    b = theory.bad_budget(n)
    n_bad = int(round(geom.bad_fraction * n))
    if n_bad > b:
        raise GeometryError(f"{n_bad} bad points requested but the budget is b={b}")
    if geom.separation_factor <= 16 + 2 * geom.core_radius_factor:
        raise GeometryError("separation_factor must exceed 16 + 2 * core_radius_factor")
    if geom.bad_radius[1] >= geom.separation_factor / 2:
        raise GeometryError("bad radius must stay below half the center separation")

    # sum of w over all points when the critical distance is 1
    target_total = 17 * theory.epsilon * n / theory.alpha
    failures: list[str] = []
    for attempt in range(max_attempts):
        rng = rng_stream(seed, STREAM_SYNTH, attempt)
        centers, dirs, radii, labels, bad = _layout(k, n, geom, rng)
        core_budget = target_total - radii[bad].sum()
        core_unit = radii[~bad].sum()
        if core_budget <= 0 or core_unit <= 0:
            raise GeometryError(
                "bad points alone exceed the mean-weight budget; lower bad_fraction or raise epsilon"
            )
        scale = core_budget / core_unit
        if scale > geom.core_radius_factor:
            raise GeometryError(
                f"cores would need radius {scale:.3g} > core_radius_factor="
                f"{geom.core_radius_factor}; epsilon/alpha is too large for this geometry"
            )
        points = _assemble(centers, dirs, radii, labels, bad, scale)
        target = Clustering(labels, k)
        inst = PlantedInstance(points, target, theory, {}, seed, centers)
        if not certify or k < 2:
            inst.certificate = _certificate_uncertified(inst, geom, bad, scale, attempt)
            return inst

        analysis = classify_points(inst.matrix(), target, theory)
        if abs(analysis.d_crit - 1.0) > 0.1:
            # w is linear in the core scale with the bad part held fixed
            core_w = analysis.w[~bad].sum()
            bad_w = analysis.w[bad].sum()
            if core_w > 0 and target_total > bad_w:
                scale *= (target_total - bad_w) / core_w
                if scale <= geom.core_radius_factor:
                    points = _assemble(centers, dirs, radii, labels, bad, scale)
                    inst = PlantedInstance(points, target, theory, {}, seed, centers)
                    analysis = classify_points(inst.matrix(), target, theory)
        problems = analysis.invariant_failures()
        if abs(analysis.d_crit - 1.0) > 0.1:
            problems.append(f"realized d_crit {analysis.d_crit:.4g} not within 10% of 1")
        if not problems:
            inst.certificate = _certificate(inst, geom, analysis, scale, attempt)
            return inst
        failures.append(f"attempt {attempt}: " + "; ".join(problems))
    raise GeometryError("no certified instance after retries: " + " | ".join(failures))


def _base_certificate(inst, geom, scale, attempt):
    theory, n = inst.theory, inst.n
    sizes = inst.target.sizes().tolist()
    bound = theory.min_cluster_size(n)
    return {
        "generator_version": GENERATOR_VERSION,
        "seed": inst.seed,
        "attempt": attempt,
        "n": n,
        "k": inst.target.k,
        "alpha": theory.alpha,
        "epsilon": theory.epsilon,
        "b": theory.bad_budget(n),
        "cluster_sizes": sizes,
        "size_bound": bound,
        "meets_size_bound": min(sizes) >= bound,
        "core_scale": float(scale),
        "geometry": {**asdict(geom), "bad_radius": list(geom.bad_radius)},
    }


def _certificate(inst, geom, analysis: PointAnalysis, scale, attempt) -> dict:
    cert = _base_certificate(inst, geom, scale, attempt)
    cert.update(
        certified=True,
        d_crit=analysis.d_crit,
        avg_weight=analysis.avg_weight,
        good_set_sizes=analysis.good_set_sizes,
        bad_count=analysis.bad_count,
        min_inter_core_distance=analysis.min_inter_core_distance,
        max_core_radius=analysis.max_core_radius,
        max_core_diameter=analysis.max_core_diameter,
        medians=analysis.medians,
    )
    return cert


def _certificate_uncertified(inst, geom, bad, scale, attempt) -> dict:
    cert = _base_certificate(inst, geom, scale, attempt)
    cert.update(certified=False, planted_bad=int(bad.sum()), d_crit_target=1.0)
    return cert


CERTIFICATE_FILE = "certificate.json"
MATRIX_FILE = "matrix.bin"
LABELS_FILE = "labels.txt"


def export_instance(inst: PlantedInstance, out_dir) -> dict[str, Path]:
    """Write matrix (binary format), target labels and certificate JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "matrix": out / MATRIX_FILE,
        "labels": out / LABELS_FILE,
        "certificate": out / CERTIFICATE_FILE,
    }
    fileio.write_matrix_bin(paths["matrix"], inst.matrix())
    fileio.write_labels(paths["labels"], inst.target)
    fileio.write_json(paths["certificate"], inst.certificate)
    return paths


def load_bundle(path) -> tuple[np.ndarray, Clustering, dict]:
    """Read an exported bundle back: (matrix, target, certificate)."""
    base = Path(path)
    matrix = fileio.read_matrix(base / MATRIX_FILE)
    labels = fileio.read_labels(base / LABELS_FILE)
    cert = fileio.read_json(base / CERTIFICATE_FILE)
    k = int(cert.get("k", labels.max() + 1))
    return matrix, Clustering(labels, k), cert


def theory_of(cert: dict) -> TheoryParams:
    return TheoryParams(cert["alpha"], cert["epsilon"])

