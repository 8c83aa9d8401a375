"""Command line entry point: ``prunerank <subcommand>``.

Data goes to files or stdout; diagnostics go to stderr. Exit status is 0 on
success, 1 on any runtime error and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from prunerank import io
from prunerank.bench import TSV_HEADER, bench_throughput
from prunerank.evaluation import DEFAULT_METRICS, EvalConfig, evaluate_run, parse_metric
from prunerank.index import DEFAULT_RUN_DEPTH, EmbeddingIndex, resolve_threads, search_many
from prunerank.linalg import ConvergenceError
from prunerank.pca import fit_pca, prune_model, sample_rows, transform_corpus
from prunerank.stats import ALPHA, wilcoxon_signed_rank
from prunerank.synth import SynthSpec, generate

log = logging.getLogger("prunerank")

DEFAULT_SAMPLE_SIZE = 100_000
DASH = "–"


class CliError(Exception):
    pass


def _cutoff(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid cutoff {text!r}") from None
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"cutoff must be in [0, 1), got {value}")
    return value


def _cutoff_list(text: str) -> list[float]:
    return [_cutoff(part) for part in text.split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return values


def _metric_list(text: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    try:
        for name in names:
            parse_metric(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return names


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {path}")
    return p


def _load_matrix(path: Path, ids_path: Path | None, what: str):
    matrix = io.read_vectors(path)
    if matrix.shape[0] == 0:
        raise CliError(f"{path}: no {what} vectors")
    ids = None
    if ids_path is not None:
        ids = io.read_ids(ids_path)
        if len(ids) != matrix.shape[0]:
            raise CliError(f"{ids_path}: {len(ids)} ids for {matrix.shape[0]} {what} vectors")
    return matrix, ids


def _eval_config(args) -> EvalConfig:
    return EvalConfig(
        metrics=args.metrics, gain=args.gain, rel_threshold=args.rel_threshold, depth=args.depth
    )


def _clamped_sample_size(requested: int, n: int) -> int:
    if requested > n:
        log.warning("sample size %d exceeds %d available rows; using all rows", requested, n)
        return n
    return requested


# --- subcommands ---------------------------------------------------------


def cmd_generate(args) -> None:
    spec = SynthSpec(
        n_docs=args.n_docs,
        n_queries=args.n_queries,
        dim=args.dim,
        intrinsic_rank=args.rank,
        signal_decay=args.decay,
        noise_sigma=args.noise,
        seed=args.seed,
        k_relevant=args.k_relevant,
        latent_seed=args.latent_seed,
    )
    corpus = generate(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_vectors(out / "docs.fvecs", corpus.docs)
    io.write_ids(out / "docs.ids", corpus.doc_ids)
    io.write_vectors(out / "queries.fvecs", corpus.queries)
    io.write_ids(out / "queries.ids", corpus.query_ids)
    io.write_qrels(out / "qrels.txt", corpus.qrels)
    print(f"wrote {spec.n_docs} docs, {spec.n_queries} queries (d={spec.dim}) to {out}")


def cmd_fit(args) -> None:
    docs, _ = _load_matrix(args.docs, None, "document")
    size = _clamped_sample_size(args.sample_size, docs.shape[0])
    sample = sample_rows(docs, size, args.seed)
    if args.center:
        log.warning("fitting on mean-centered rows; pruning no longer follows "
                    "the uncentered decomposition")
    model = fit_pca(sample, args.tag if args.tag is not None else str(args.docs), center=args.center)
    io.save_pca(args.out, model)
    total = float(np.sum(model.eigenvalues))
    print(f"fitted d={model.dim} on {model.fitted_on} rows -> {args.out}")
    print("cutoff\tm\tretained_variance")
    for c in (0.0, 0.25, 0.5, 0.75, 0.9):
        t = prune_model(model, c)
        print(f"{c:.2f}\t{t.dim_out}\t{t.retained_variance:.6f}")
    if total == 0.0:
        log.warning("fitting sample is all zeros; the basis is arbitrary")


def cmd_prune(args) -> None:
    docs, _ = _load_matrix(args.docs, None, "document")
    model = io.load_pca(args.model)
    transform = prune_model(model, args.cutoff)
    reduced = transform_corpus(docs, transform)
    io.write_vectors(args.out, reduced)
    print(
        f"{docs.shape[0]} x {docs.shape[1]} -> {reduced.shape[0]} x {reduced.shape[1]} "
        f"(cutoff {args.cutoff}, retained variance {transform.retained_variance:.6f}) -> {args.out}"
    )


def _build_search(index_path, ids_path, model_path, cutoff):
    """Index plus optional query transform for a search-like command.

    With a model, an index of the model's width is projected in memory
    (kept in float64); an index already of the pruned width is used as is.
    """
    docs, doc_ids = _load_matrix(index_path, ids_path, "document")
    if model_path is None:
        if cutoff is not None:
            raise CliError("--cutoff requires --model")
        return EmbeddingIndex(doc_ids, docs, tag="full", dtype=docs.dtype), None
    model = io.load_pca(model_path)
    transform = prune_model(model, cutoff or 0.0)
    tag = f"pca-c{round(transform.cutoff * 100)}"
    if docs.shape[1] == model.dim:
        return EmbeddingIndex.from_transform(doc_ids, docs, transform, tag=tag), transform
    if docs.shape[1] == transform.dim_out:
        return EmbeddingIndex(doc_ids, docs, tag=tag, dtype=docs.dtype), transform
    raise CliError(
        f"index width {docs.shape[1]} matches neither the model ({model.dim}) "
        f"nor the pruned width ({transform.dim_out})"
    )


def cmd_search(args) -> None:
    index, transform = _build_search(args.index, args.ids, args.model, args.cutoff)
    queries, query_ids = _load_matrix(args.queries, args.query_ids, "query")
    rankings = search_many(index, query_ids, queries, k=args.k, transform=transform,
                           threads=args.threads)
    io.write_run(args.out, rankings, args.tag or index.tag)
    print(f"searched {len(query_ids)} queries over {len(index)} docs (dim {index.dim}) -> {args.out}")


def cmd_eval(args) -> None:
    run = io.read_run(args.run)
    qrels = io.read_qrels(args.qrels)
    reports = evaluate_run(run, qrels, _eval_config(args))
    out = ["metric\tquery_id\tvalue"]
    for report in reports:
        for qid, value in report.per_query.items():
            out.append(f"{report.metric}\t{qid}\t{value:.6f}")
    out.append("")
    out.append("# summary")
    for report in reports:
        out.append(f"{report.metric}\tall\t{report.mean:.6f}")
    print("\n".join(out))
    if args.json:
        payload = {
            "run": str(args.run),
            "qrels": str(args.qrels),
            "gain": args.gain,
            "rel_threshold": args.rel_threshold,
            "depth": args.depth,
            "metrics": {r.metric: {"mean": r.mean, "per_query": r.per_query} for r in reports},
        }
        Path(args.json).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_compare(args) -> None:
    run_a = io.read_run(args.run_a)
    run_b = io.read_run(args.run_b)
    qrels = io.read_qrels(args.qrels)
    ids_a = {r.query_id for r in run_a}
    ids_b = {r.query_id for r in run_b}
    shared = ids_a & ids_b & set(qrels)
    if not shared:
        raise CliError("runs share no judged queries")
    dropped = (ids_a | ids_b) & set(qrels) - shared
    if dropped:
        log.warning("%d judged queries appear in only one run; excluded", len(dropped))
    config = EvalConfig(metrics=(args.metric,), gain=args.gain,
                        rel_threshold=args.rel_threshold, depth=args.depth)
    sub_qrels = {q: qrels[q] for q in sorted(shared)}
    rep_a = evaluate_run([r for r in run_a if r.query_id in shared], sub_qrels, config)[0]
    rep_b = evaluate_run([r for r in run_b if r.query_id in shared], sub_qrels, config)[0]
    order = sorted(shared)
    result = wilcoxon_signed_rank(
        [rep_a.per_query[q] for q in order], [rep_b.per_query[q] for q in order], alpha=args.alpha
    )
    print("metric\tqueries\tmean_a\tmean_b\tn_effective\tstatistic\tp_two_tailed\tsignificant")
    print(
        f"{args.metric}\t{len(order)}\t{rep_a.mean:.6f}\t{rep_b.mean:.6f}\t{result.n_effective}\t"
        f"{result.statistic:g}\t{result.p_two_tailed:.6g}\t{str(result.significant).lower()}"
    )


def sweep_table(docs, doc_ids, queries, query_ids, qrels, cutoffs, sample_sizes, *,
                seed=0, k=DEFAULT_RUN_DEPTH, config=None, alpha=ALPHA, fit_docs=None,
                threads=None):
    """Rows of the pruning sweep: a baseline row, then one per (sample size, cutoff).

    Each metric gets its value, a two-tailed Wilcoxon p-value against the
    baseline's per-query values, and a ``sig`` flag (p < alpha).
    """
    config = config or EvalConfig()
    fit_source = docs if fit_docs is None else fit_docs
    baseline_index = EmbeddingIndex(doc_ids, docs, tag="full", dtype=docs.dtype)
    baseline = {
        r.metric: r for r in evaluate_run(
            search_many(baseline_index, query_ids, queries, k=k, threads=threads), qrels, config)
    }
    qids = list(qrels)
    d = docs.shape[1]
    header = ["sample_size", "cutoff", "m", "retained_variance"]
    for name in config.metrics:
        header += [name, f"{name}_p", f"{name}_sig"]
    rows = [header]
    row = [DASH, DASH, str(d), f"{1.0:.6f}"]
    for name in config.metrics:
        row += [f"{baseline[name].mean:.6f}", DASH, DASH]
    rows.append(row)
    for size in sample_sizes:
        size = _clamped_sample_size(size, fit_source.shape[0])
        model = fit_pca(sample_rows(fit_source, size, seed))
        if model.dim != d:
            raise CliError(f"fitting corpus width {model.dim} != document width {d}")
        for c in cutoffs:
            transform = prune_model(model, c)
            index = EmbeddingIndex.from_transform(doc_ids, docs, transform)
            reports = evaluate_run(
                search_many(index, query_ids, queries, k=k, transform=transform, threads=threads),
                qrels, config)
            row = [str(size), f"{c:.2f}", str(transform.dim_out), f"{transform.retained_variance:.6f}"]
            for report in reports:
                base = baseline[report.metric]
                test = wilcoxon_signed_rank(
                    [report.per_query[q] for q in qids], [base.per_query[q] for q in qids], alpha
                )
                row += [f"{report.mean:.6f}", f"{test.p_two_tailed:.6g}",
                        str(test.significant).lower()]
            rows.append(row)
    return rows


def cmd_sweep(args) -> None:
    docs, doc_ids = _load_matrix(args.docs, args.doc_ids, "document")
    queries, query_ids = _load_matrix(args.queries, args.query_ids, "query")
    qrels = io.read_qrels(args.qrels)
    fit_docs = None
    if args.fit_docs is not None:
        fit_docs, _ = _load_matrix(args.fit_docs, None, "fitting")
    rows = sweep_table(
        docs, doc_ids, queries, query_ids, qrels, args.cutoffs, args.sample_sizes,
        seed=args.seed, k=args.k, config=_eval_config(args), alpha=args.alpha,
        fit_docs=fit_docs, threads=args.threads,
    )
    text = "".join("\t".join(r) + "\n" for r in rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_bench(args) -> None:
    docs, doc_ids = _load_matrix(args.index, args.ids, "document")
    if doc_ids is None:
        doc_ids = [str(i) for i in range(docs.shape[0])]
    queries, _ = _load_matrix(args.queries, None, "query")
    if resolve_threads(args.threads) != 1:
        log.warning("bench scoring is single-threaded; ignoring --threads")
    print(TSV_HEADER)
    full = EmbeddingIndex(doc_ids, docs, tag="full")
    print(bench_throughput(full, queries, args.repetitions, k=args.k).tsv_row(), flush=True)
    if args.model is None:
        return
    model = io.load_pca(args.model)
    for c in args.cutoffs:
        transform = prune_model(model, c)
        pruned = EmbeddingIndex(doc_ids, transform_corpus(docs, transform),
                                tag=f"pca-c{round(c * 100)}", dtype=np.float32)
        print(bench_throughput(pruned, queries, args.repetitions, transform=transform,
                               k=args.k).tsv_row(), flush=True)


# --- parser --------------------------------------------------------------


def _add_metric_flags(p, metrics=True):
    if metrics:
        p.add_argument("--metrics", type=_metric_list, default=DEFAULT_METRICS,
                       help="comma-separated, e.g. AP,nDCG@10,MRR@10")
    p.add_argument("--gain", choices=("exp", "linear"), default="exp",
                   help="nDCG gain: exp (2^rel-1, default) or linear")
    p.add_argument("--rel-threshold", type=int, default=1,
                   help="minimum grade counted relevant for AP and MRR (default 1)")
    p.add_argument("--depth", type=int, default=1000, help="AP depth (default 1000)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prunerank", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic corpus with planted qrels")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-docs", type=int, default=10_000)
    p.add_argument("--n-queries", type=int, default=200)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--rank", type=int, default=32)
    p.add_argument("--decay", type=float, default=0.95)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--k-relevant", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--latent-seed", type=int, default=None,
                   help="seed of the shared latent basis (default: --seed)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit the PCA model on (a sample of) document vectors")
    p.add_argument("docs", type=_existing)
    p.add_argument("--out", required=True)
    p.add_argument("--sample-size", type=int, default=DEFAULT_SAMPLE_SIZE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tag", default=None, help="source tag stored in the model")
    p.add_argument("--center", action="store_true",
                   help="subtract column means before fitting (off by default)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("prune", help="write pruned document vectors at a cutoff")
    p.add_argument("docs", type=_existing)
    p.add_argument("--model", type=_existing, required=True)
    p.add_argument("--cutoff", type=_cutoff, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("search", help="exact top-k search, writing a TREC run")
    p.add_argument("--index", type=_existing, required=True)
    p.add_argument("--ids", type=_existing, required=True)
    p.add_argument("--queries", type=_existing, required=True)
    p.add_argument("--query-ids", type=_existing, required=True)
    p.add_argument("--model", type=_existing)
    p.add_argument("--cutoff", type=_cutoff)
    p.add_argument("--k", type=int, default=DEFAULT_RUN_DEPTH)
    p.add_argument("--tag", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("eval", help="per-query and mean AP / nDCG@k / MRR@k")
    p.add_argument("run", type=_existing)
    p.add_argument("qrels", type=_existing)
    _add_metric_flags(p)
    p.add_argument("--json", default=None, help="also write a JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="paired Wilcoxon signed-rank test between two runs")
    p.add_argument("run_a", type=_existing)
    p.add_argument("run_b", type=_existing)
    p.add_argument("qrels", type=_existing)
    p.add_argument("--metric", default="nDCG@10", type=lambda s: _metric_list(s)[0])
    _add_metric_flags(p, metrics=False)
    p.add_argument("--alpha", type=float, default=ALPHA)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="cutoff x sample-size grid against the unpruned baseline")
    p.add_argument("--docs", type=_existing, required=True)
    p.add_argument("--doc-ids", type=_existing, required=True)
    p.add_argument("--queries", type=_existing, required=True)
    p.add_argument("--query-ids", type=_existing, required=True)
    p.add_argument("--qrels", type=_existing, required=True)
    p.add_argument("--fit-docs", type=_existing, default=None,
                   help="fit on this corpus instead (out-of-domain PCA)")
    p.add_argument("--cutoff", "--cutoffs", dest="cutoffs", type=_cutoff_list,
                   default=[0.25, 0.5, 0.75])
    p.add_argument("--sample-size", "--sample-sizes", dest="sample_sizes", type=_int_list,
                   default=[DEFAULT_SAMPLE_SIZE])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=DEFAULT_RUN_DEPTH)
    p.add_argument("--alpha", type=float, default=ALPHA)
    p.add_argument("--threads", type=int, default=None)
    _add_metric_flags(p)
    p.add_argument("--out", default=None, help="TSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="query throughput, full vs pruned")
    p.add_argument("--index", type=_existing, required=True)
    p.add_argument("--ids", type=_existing, default=None)
    p.add_argument("--queries", type=_existing, required=True)
    p.add_argument("--model", type=_existing, default=None)
    p.add_argument("--cutoff", "--cutoffs", dest="cutoffs", type=_cutoff_list, default=[0.5, 0.75])
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if getattr(args, "k", 1) < 1:
            raise CliError("--k must be >= 1")
        if getattr(args, "threads", None) is not None:
            resolve_threads(args.threads)
        args.func(args)
    except (CliError, ValueError, KeyError, ConvergenceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
