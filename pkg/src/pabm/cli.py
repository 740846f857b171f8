"""Command line entry point: ``pabm simulate|detect|estimate|sweep-theta|eval``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .cluster import default_theta
from .errors import DataError, InvalidArgument, NumericFailure
from .estimation import estimate_lambdas, reconstruct_P_blockwise, reconstruct_P_labelfree
from .harness import METHODS, ExperimentConfig, run_detect, simulate_to_dir
from .io import encode_labels, load_edgelist, load_similarity, read_labels, write_labels
from .model import edge_prob_matrix, mixture_weights, random_params, sample_adjacency

log = logging.getLogger("pabm")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _detect_options(p):
    p.add_argument("--K", type=int, required=True, help="number of communities")
    p.add_argument("--theta", type=float, default=None,
                   help="SSC sparsity penalty (default 0.05/sqrt(n))")
    p.add_argument("--partition", choices=["spectral", "threshold"], default="spectral")
    p.add_argument("--threshold", type=float, default=None,
                   help="affinity threshold for --partition threshold")
    p.add_argument("--clusterer", choices=["gmm", "kmeans"], default="gmm")
    p.add_argument("--gmm-restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="seed for the mixture-model restarts")


def _graph_options(p, labels_required=False):
    p.add_argument("--edges", help="edge list: two whitespace-separated tokens per line")
    p.add_argument("--labels", required=labels_required, help="CSV with header vertex,label")
    p.add_argument("--drop-isolated", action="store_true", help="remove degree-0 vertices")


def build_parser():
    parser = _Parser(prog="pabm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run the simulation study grid")
    p.add_argument("--n-list", type=int, nargs="+", default=[128, 256, 512, 1024])
    p.add_argument("--K-list", type=int, nargs="+", default=[2, 3])
    p.add_argument("--balance", choices=["balanced", "imbalanced"], default="balanced")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--method", choices=["osc", "ssc", "both"], default="osc")
    p.add_argument("--within-beta", type=float, nargs=2, default=[2.0, 1.0], metavar=("A", "B"))
    p.add_argument("--between-beta", type=float, nargs=2, default=[1.0, 2.0], metavar=("A", "B"))
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--partition", choices=["spectral", "threshold"], default="spectral")
    p.add_argument("--clusterer", choices=["gmm", "kmeans"], default="gmm")
    p.add_argument("--gmm-restarts", type=int, default=10)
    p.add_argument("--gmm-max-iter", type=int, default=300)
    p.add_argument("--gmm-tol", type=float, default=1e-6)
    p.add_argument("--no-estimate", action="store_true", help="skip the RMSE columns")
    p.add_argument("--record-timing", action="store_true",
                   help="fill wall_ms (makes output run-dependent)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("detect", help="detect communities in an edge list")
    _graph_options(p)
    _detect_options(p)
    p.add_argument("--method", choices=list(METHODS), default="osc")
    p.add_argument("--out", help="write vertex,label CSV here (default stdout)")

    p = sub.add_parser("estimate", help="estimate popularity vectors / edge probabilities")
    _graph_options(p)
    p.add_argument("--K", type=int, help="community count for --label-free")
    p.add_argument("--label-free", action="store_true",
                   help="reconstruct P from the embedding without labels")
    p.add_argument("--clip", action="store_true", help="clip the label-free estimate to [0, 1]")
    p.add_argument("--out", help="JSON file for the estimates (default stdout)")
    p.add_argument("--p-out", help="save the reconstructed P as .npy")

    p = sub.add_parser("sweep-theta", help="community detection error of SSC over a grid of theta")
    _graph_options(p)
    _detect_options(p)
    p.add_argument("--n", type=int, help="simulate a graph of this size instead of reading one")
    p.add_argument("--balance", choices=["balanced", "imbalanced"], default="balanced")
    p.add_argument("--graph-seed", type=int, default=0)
    p.add_argument("--thetas", type=float, nargs="+")
    p.add_argument("--theta-min", type=float, default=1e-3)
    p.add_argument("--theta-max", type=float, default=1.0)
    p.add_argument("--num", type=int, default=10)
    p.add_argument("--out", help="CSV output (default stdout)")

    p = sub.add_parser("eval", help="score detection against known labels")
    _graph_options(p, labels_required=True)
    _detect_options(p)
    p.add_argument("--similarity", help="dense similarity matrix (.npy or CSV) to threshold")
    p.add_argument("--sim-threshold", type=float,
                   help="similarities above this become edges (no published value exists)")
    p.add_argument("--method", choices=list(METHODS) + ["both"], default="both")
    return parser


def _load_graph(args, need_labels=False):
    if getattr(args, "similarity", None):
        if args.sim_threshold is None:
            raise InvalidArgument("--similarity needs --sim-threshold")
        g = load_similarity(args.similarity, args.sim_threshold)
        labels = None
        if args.labels:
            labels, _ = encode_labels(g.vertices, read_labels(args.labels), args.labels)
        A = np.asarray(g.A)
        vertices = g.vertices
        if args.drop_isolated:
            keep = A.sum(axis=1) > 0
            A = A[np.ix_(keep, keep)]
            vertices = [v for v, k in zip(vertices, keep) if k]
            labels = None if labels is None else labels[keep]
        return A, vertices, labels
    if not args.edges:
        raise InvalidArgument("an input graph is required (--edges)")
    g = load_edgelist(args.edges, labels=args.labels, drop_isolated=args.drop_isolated)
    log.info("loaded %d vertices; %d self-loops and %d duplicate edges dropped, %d isolated removed",
             g.n, g.self_loops, g.duplicates, g.isolated_dropped)
    if need_labels and g.labels is None:
        raise InvalidArgument("--labels is required")
    return np.asarray(g.A), g.vertices, g.labels


def _detect_kwargs(args):
    return dict(theta=args.theta, mode=args.partition, threshold=args.threshold,
                seed=args.seed, clusterer=args.clusterer, restarts=args.gmm_restarts)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    cfg = ExperimentConfig(
        n_list=args.n_list, K_list=args.K_list, balance=args.balance, replicates=args.replicates,
        seed=args.seed, method=args.method, within_beta=args.within_beta,
        between_beta=args.between_beta, rho=args.rho, theta=args.theta, partition=args.partition,
        clusterer=args.clusterer, gmm_restarts=args.gmm_restarts, gmm_max_iter=args.gmm_max_iter,
        gmm_tol=args.gmm_tol, estimate=not args.no_estimate, record_timing=args.record_timing,
    )
    records = simulate_to_dir(cfg, args.out, workers=args.workers)
    log.info("wrote %d records to %s", len(records), args.out)


def cmd_detect(args):
    A, vertices, labels = _load_graph(args)
    out = run_detect(A, args.K, method=args.method, labels=labels, **_detect_kwargs(args))
    if args.out:
        write_labels(out.clustering.labels, args.out, vertices)
    else:
        sys.stdout.write("vertex,label\n")
        for v, lab in zip(vertices, out.clustering.labels):
            sys.stdout.write(f"{v},{int(lab)}\n")
    if out.report is not None:
        sys.stderr.write(json.dumps(out.report.as_dict(), sort_keys=True) + "\n")


def cmd_estimate(args):
    A, vertices, labels = _load_graph(args)
    if args.label_free:
        if args.K is None:
            raise InvalidArgument("--label-free needs --K")
        rec = reconstruct_P_labelfree(A, args.K, clip=args.clip)
        doc = {"route": rec.route, "n": len(vertices), "K": args.K}
    else:
        if labels is None:
            raise InvalidArgument("blockwise estimation needs --labels (or use --label-free)")
        est = estimate_lambdas(A, labels)
        rec = reconstruct_P_blockwise(est, labels)
        doc = {
            "route": rec.route, "n": len(vertices), "K": est.K,
            "degenerate_blocks": sorted(f"{k},{l}" for k, l in est.degenerate),
            "blocks": {
                f"{k},{l}": {
                    "sigma": est.sigma[(min(k, l), max(k, l))],
                    "popularity": {vertices[i]: float(x) for i, x in zip(est.members[k], vec)},
                }
                for (k, l), vec in sorted(est.vectors.items())
            },
        }
    if args.p_out:
        np.save(args.p_out, rec.P)
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)


def cmd_sweep_theta(args):
    if args.n is not None:
        rng = np.random.default_rng(args.graph_seed)
        params = random_params(args.n, args.K, rng, alpha=mixture_weights(args.K, args.balance))
        A = sample_adjacency(edge_prob_matrix(params), rng).A
        labels = params.z
    else:
        A, _, labels = _load_graph(args, need_labels=True)
    n = A.shape[0]
    thetas = args.thetas or list(np.geomspace(args.theta_min, args.theta_max, args.num))
    lines = ["theta,miscluster_count,miscluster_rate,ari,zero_rows,status"]
    kwargs = _detect_kwargs(args)
    for theta in thetas:
        kwargs["theta"] = float(theta)
        try:
            out = run_detect(A, args.K, method="ssc", labels=labels, **kwargs)
        except NumericFailure as exc:
            lines.append(f"{theta!r},,,,,failed:{exc.stage}")
            continue
        rep = out.report
        zero_rows = int(np.sum(~out.affinity.coef.any(axis=1)))
        lines.append(f"{float(theta)!r},{rep.miscluster_count},{rep.miscluster_rate!r},"
                     f"{rep.ari!r},{zero_rows},ok")
    log.info("default theta for n=%d would be %.4g", n, default_theta(n))
    _emit("\n".join(lines) + "\n", args.out)


def cmd_eval(args):
    A, _, labels = _load_graph(args, need_labels=True)
    methods = METHODS if args.method == "both" else (args.method,)
    doc = {"n": int(A.shape[0]), "K": args.K, "results": {}}
    for method in methods:
        out = run_detect(A, args.K, method=method, labels=labels, **_detect_kwargs(args))
        doc["results"][method] = out.report.as_dict()
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", None)


COMMANDS = {"simulate": cmd_simulate, "detect": cmd_detect, "estimate": cmd_estimate,
            "sweep-theta": cmd_sweep_theta, "eval": cmd_eval}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except NumericFailure as exc:
        stage = f" [{exc.stage}]" if exc.stage else ""
        print(f"pabm: numeric failure{stage}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, InvalidArgument, OSError) as exc:
        print(f"pabm: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
