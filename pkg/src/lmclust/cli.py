"""Command-line interface: ``lmclust {gen,cluster,eval,bench,check-metric}``.

Every command prints a JSON report (or writes it to ``--report``).

Exit codes:
    0  success
    2  I/O failure (missing or unreadable file)
    3  invalid parameters or inputs
    4  no clustering found (the sweep never reached k covering components)
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
from dataclasses import replace

from . import __version__, fileio
from .baselines import d2_seed_assign, embed_and_kmeans
from .core import (
    STREAM_BASELINE,
    STREAM_METRIC,
    STREAM_RUNS,
    Clustering,
    ParameterError,
    TheoryParams,
    derive_params,
    derive_params_practical,
    derive_seed,
    rng_stream,
)
from .evaluation import clustering_distance, kmedian_cost
from .expansion import NoCluster
from .oracle import EuclideanOracle, MatrixOracle, check_triangle
from .pipeline import landmark_clustering
from .synth import Geometry, GeometryError, export_instance, generate_planted, load_bundle

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARAMS = 3
EXIT_NO_CLUSTER = 4

REPORT_SCHEMA = 1
METHODS = ("landmark", "embed-kmeans", "d2seed")

RETRY_HINT = (
    "no clustering found: s_min is the most sensitive parameter. Try several "
    "values in increasing or decreasing order (e.g. --smin-sweep lo:hi:step) until a "
    "clustering appears with no overly large cluster; a smaller n_prime can also help."
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAMS, f"{self.prog}: error: {message}\n")


def _report(command, seed, params, queries, t0, result) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "command": command,
        "version": __version__,
        "seed": seed,
        "params": params,
        "queries_used": queries,
        "wall_time_ms": round((time.perf_counter() - t0) * 1e3, 3),
        "result": result,
    }


def _emit(doc: dict, path) -> None:
    if path:
        fileio.write_json(path, doc)
    else:
        print(fileio.dumps(doc))


def _load_oracle(args):
    if getattr(args, "matrix", None):
        return MatrixOracle(fileio.read_matrix(args.matrix), symmetrize=args.symmetrize)
    if getattr(args, "points", None):
        return EuclideanOracle(fileio.read_points(args.points))
    raise UsageError("one of --matrix or --points is required")


def _parse_sweep(text: str) -> list[int]:
    try:
        lo, hi, step = (int(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--smin-sweep expects lo:hi:step, got {text!r}") from None
    if lo < 1 or hi < lo or step < 1:
        raise UsageError(f"invalid --smin-sweep range {text!r}")
    return list(range(lo, hi + 1, step))


def _cluster_params(args, n: int):
    theory_mode = args.alpha is not None or args.epsilon is not None
    practical_mode = args.mu is not None
    if theory_mode == practical_mode:
        raise UsageError("give either --alpha/--epsilon or --mu/--smin-factor/--landmarks")
    if theory_mode:
        if args.alpha is None or args.epsilon is None:
            raise UsageError("theory mode needs both --alpha and --epsilon")
        params = derive_params(n, args.k, TheoryParams(args.alpha, args.epsilon), seed=args.seed)
        if args.landmarks is not None:
            params = _with_landmarks(params, args.landmarks, n)
        return params
    if args.landmarks is None:
        raise UsageError("practical mode needs --landmarks")
    return derive_params_practical(
        n, args.k, args.mu, args.smin_factor, args.landmarks, seed=args.seed
    )


def _with_landmarks(params, num, n):
    return replace(params, num_landmarks=num).validate(n)


# --------------------------------------------------------------------- gen


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    geom = Geometry(
        core_radius_factor=args.core_radius_factor,
        separation_factor=args.separation_factor,
        bad_fraction=args.bad_fraction,
        dim=args.dim,
    )
    theory = TheoryParams(args.alpha, args.epsilon)
    inst = generate_planted(args.k, args.n, theory, geom, seed=args.seed)
    paths = export_instance(inst, args.out_dir)
    result = {"files": {k: str(v) for k, v in paths.items()}, "certificate": inst.certificate}
    params = {"k": args.k, "n": args.n, "alpha": args.alpha, "epsilon": args.epsilon}
    _emit(_report("gen", args.seed, params, 0, t0, result), args.report)
    return EXIT_OK


# ----------------------------------------------------------------- cluster


def _largest_fraction(clustering: Clustering) -> float:
    return float(clustering.sizes().max()) / clustering.n


def cmd_cluster(args) -> int:
    t0 = time.perf_counter()
    oracle = _load_oracle(args)
    params = _cluster_params(args, oracle.n)
    sweep = _parse_sweep(args.smin_sweep) if args.smin_sweep else None

    trace = []
    outcome = None
    if sweep is None:
        outcome = landmark_clustering(oracle, params)
    else:
        for s_min in sweep:
            attempt = params.with_s_min(s_min).validate(oracle.n)
            res = landmark_clustering(oracle, attempt)
            if isinstance(res, NoCluster):
                trace.append({"s_min": s_min, "status": "no-cluster", "reason": res.reason})
                outcome = res
                continue
            frac = _largest_fraction(res.clustering)
            ok = frac <= args.max_cluster_frac
            trace.append({"s_min": s_min, "status": "accepted" if ok else "too-large",
                          "largest_cluster_frac": frac})
            outcome = res
            if ok:
                break
        else:
            if not isinstance(outcome, NoCluster):
                outcome = NoCluster(
                    reason=f"every clustering in the sweep had a cluster above "
                    f"{args.max_cluster_frac} of the points"
                )

    if isinstance(outcome, NoCluster):
        print(RETRY_HINT, file=sys.stderr)
        print(fileio.dumps(outcome.as_dict()), file=sys.stderr)
        result = {"status": "no-cluster", "diagnostic": outcome.as_dict(), "sweep": trace}
        queries = outcome.diagnostics.get("queries_used", 0)
        _emit(_report("cluster", args.seed, params.as_dict(), queries, t0, result), args.report)
        return EXIT_NO_CLUSTER

    if args.out:
        fileio.write_labels(args.out, outcome.clustering)
    result = {"status": "ok", **outcome.payload(), "sweep": trace}
    if sweep is not None:
        result["accepted_s_min"] = outcome.params.s_min
    if args.target:
        target = Clustering.from_labels(fileio.read_labels(args.target))
        result["distance_to_target"] = clustering_distance(outcome.clustering, target).distance
    _emit(
        _report("cluster", args.seed, outcome.params.as_dict(), outcome.queries_used, t0, result),
        args.report,
    )
    return EXIT_OK


# -------------------------------------------------------------------- eval


def cmd_eval(args) -> int:
    t0 = time.perf_counter()
    la, lb = fileio.read_labels(args.labels_a), fileio.read_labels(args.labels_b)
    if la.size != lb.size:
        raise UsageError(f"label files cover different point counts ({la.size} vs {lb.size})")
    if (la < 0).any() or (lb < 0).any():
        raise UsageError("label files must be complete (no negative labels)")
    a, b = Clustering.from_labels(la), Clustering.from_labels(lb)
    match = clustering_distance(a, b)
    result = match.as_dict()
    if args.matrix:
        m = fileio.read_matrix(args.matrix)
        if m.shape[0] != a.n:
            raise UsageError(f"matrix has {m.shape[0]} points, labels have {a.n}")
        result["kmedian_cost_a"] = kmedian_cost(a, m).cost
        result["kmedian_cost_b"] = kmedian_cost(b, m).cost
    _emit(_report("eval", None, {}, 0, t0, result), args.report)
    return EXIT_OK


# ------------------------------------------------------------------- bench


def _run_method(method, oracle, target, k, budget, params, run_seed):
    t = time.perf_counter()
    if method == "landmark":
        res = landmark_clustering(
            oracle, replace(params, num_landmarks=budget, seed=run_seed).validate(oracle.n)
        )
        if isinstance(res, NoCluster):
            return None, res.diagnostics.get("queries_used", budget), (time.perf_counter() - t) * 1e3
        clustering, queries = res.clustering, res.queries_used
    elif method == "embed-kmeans":
        res = embed_and_kmeans(oracle, budget, k, rng_stream(run_seed, STREAM_BASELINE))
        clustering, queries = res.clustering, res.queries_used
    else:
        res = d2_seed_assign(oracle, k, rng_stream(run_seed, STREAM_BASELINE))
        clustering, queries = res.clustering, res.queries_used
    ms = (time.perf_counter() - t) * 1e3
    return clustering_distance(clustering, target).distance, queries, ms


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise UsageError(f"unknown method(s) {unknown}; choose from {list(METHODS)}")
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    matrix, target, cert = load_bundle(args.bundle)
    oracle = MatrixOracle(matrix)
    n, k = oracle.n, target.k
    budget = args.budget if args.budget is not None else 4 * k
    if args.mu is not None:
        params = derive_params_practical(n, k, args.mu, args.smin_factor, budget)
    else:
        alpha = args.alpha if args.alpha is not None else cert.get("alpha")
        epsilon = args.epsilon if args.epsilon is not None else cert.get("epsilon")
        if alpha is None or epsilon is None:
            raise UsageError("bench needs --alpha/--epsilon (or a bundle certificate) or --mu")
        params = derive_params(n, k, TheoryParams(alpha, epsilon))

    rows = []
    summary = {}
    for method in methods:
        dists, queries, times, failures = [], [], [], 0
        for run in range(args.runs):
            run_seed = derive_seed(args.seed, STREAM_RUNS, run)
            d, q, ms = _run_method(method, oracle, target, k, budget, params, run_seed)
            rows.append({"method": method, "run": run, "distance": d, "queries": q,
                         "ms": round(ms, 3)})
            if d is None:
                failures += 1
            else:
                dists.append(d)
            queries.append(q)
            times.append(ms)
        summary[method] = {
            "runs": args.runs,
            "failures": failures,
            "median_distance": statistics.median(dists) if dists else None,
            "min_distance": min(dists) if dists else None,
            "max_distance": max(dists) if dists else None,
            "median_queries": statistics.median(queries),
            "median_ms": round(statistics.median(times), 3),
        }

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["method", "run", "distance", "queries", "ms"])
            writer.writeheader()
            for row in rows:
                writer.writerow({**row, "distance": "" if row["distance"] is None else row["distance"]})
    report_params = {**params.as_dict(), "budget": budget, "methods": methods, "runs": args.runs}
    total_queries = sum(r["queries"] for r in rows)
    _emit(_report("bench", args.seed, report_params, total_queries, t0, {"methods": summary}),
          args.report)
    return EXIT_OK


# ------------------------------------------------------------ check-metric


def cmd_check_metric(args) -> int:
    t0 = time.perf_counter()
    oracle = MatrixOracle(fileio.read_matrix(args.matrix), symmetrize=args.symmetrize)
    if oracle.n < 3:
        raise UsageError("triangle check needs at least 3 points")
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    rep = check_triangle(oracle, args.samples, rng_stream(args.seed, STREAM_METRIC))
    _emit(_report("check-metric", args.seed, {"samples": args.samples}, 0, t0, rep.as_dict()),
          args.report)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lmclust", description="Landmark clustering with one-versus-all queries.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--report", help="write the JSON report here instead of stdout")

    g = sub.add_parser("gen", help="generate a certified planted instance bundle")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--epsilon", type=float, required=True)
    g.add_argument("--out-dir", required=True)
    g.add_argument("--bad-fraction", type=float, default=Geometry.bad_fraction)
    g.add_argument("--separation-factor", type=float, default=Geometry.separation_factor)
    g.add_argument("--core-radius-factor", type=float, default=Geometry.core_radius_factor)
    g.add_argument("--dim", type=int, default=Geometry.dim)
    common(g)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("cluster", help="run landmark clustering")
    src = c.add_mutually_exclusive_group()
    src.add_argument("--matrix", help="distance matrix (CSV or LMKDIST1 binary)")
    src.add_argument("--points", help="point coordinates, one per line (Euclidean distances)")
    c.add_argument("--symmetrize", choices=["max"], default=None)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--alpha", type=float)
    c.add_argument("--epsilon", type=float)
    c.add_argument("--mu", type=float, help="mean target cluster size (practical mode)")
    c.add_argument("--smin-factor", type=float, default=0.05)
    c.add_argument("--landmarks", type=int, help="number of landmarks / queries")
    c.add_argument("--smin-sweep", help="lo:hi:step values of s_min to try in order")
    c.add_argument("--max-cluster-frac", type=float, default=0.9)
    c.add_argument("--out", help="write labels here")
    c.add_argument("--target", help="target labels; report the distance to them")
    common(c)
    c.set_defaults(func=cmd_cluster)

    e = sub.add_parser("eval", help="distance between two label files")
    e.add_argument("labels_a")
    e.add_argument("labels_b")
    e.add_argument("--matrix", help="also report k-median costs of both clusterings")
    common(e, seed=False)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="compare methods on an instance bundle")
    b.add_argument("--bundle", required=True, help="directory written by 'gen'")
    b.add_argument("--methods", default=",".join(METHODS))
    b.add_argument("--runs", type=int, default=11)
    b.add_argument("--budget", type=int,
                   help="queries per run for landmark and embed-kmeans (default 4k); "
                   "d2seed always uses k")
    b.add_argument("--alpha", type=float)
    b.add_argument("--epsilon", type=float)
    b.add_argument("--mu", type=float)
    b.add_argument("--smin-factor", type=float, default=0.05)
    b.add_argument("--csv", help="write per-run plot data here")
    common(b)
    b.set_defaults(func=cmd_bench)

    m = sub.add_parser("check-metric", help="spot-check the triangle inequality")
    m.add_argument("--matrix", required=True)
    m.add_argument("--samples", type=int, default=10000)
    m.add_argument("--symmetrize", choices=["max"], default=None)
    common(m)
    m.set_defaults(func=cmd_check_metric)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 3, --help/--version exit 0
        return exc.code if isinstance(exc.code, int) else EXIT_PARAMS
    try:
        return args.func(args)
    except (OSError, fileio.FileFormatError) as exc:
        print(f"lmclust: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ParameterError, GeometryError, ValueError, IndexError) as exc:
        print(f"lmclust: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
