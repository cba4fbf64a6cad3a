"""Command-line interface.

Subcommands:
    ingest    validate a JSONL corpus, optionally attach embeddings, write it back
    simulate  run one oracle-driven session and export the learning curve CSV
    compare   run margin vs random with identical seeds; CSVs + labels-to-target summary
    serve     start the HTTP service

Exit codes: 0 success, 1 validation error (bad flags, bad corpus, bad config),
2 I/O error (unreadable input, unwritable output).
"""

import argparse
import json
import sys
from pathlib import Path

from .backend_client import BackendClient
from .benchmark import compare_strategies
from .corpus import Corpus, attach_hash_embeddings, corpus_stats, corpus_to_jsonl, ingest_corpus
from .errors import LabelLoopError
from .service import ServiceConfig, serve
from .session import SessionConfig, export_history, run_simulation
from .strategies import QueryStrategy

STRATEGY_NAMES = [s.value for s in QueryStrategy]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the CLI contract is exit 1 with usage text.
    def error(self, message: str):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="labelloop", description="Active-learning annotation engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate a JSONL corpus, optionally embed it")
    p_ingest.add_argument("jsonl", help="path to the corpus JSONL file")
    p_ingest.add_argument(
        "--embed",
        help="fill missing embeddings: hash:<dim> (built-in) or backend:<url>",
    )
    p_ingest.add_argument("--out", help="write the (embedded) corpus JSONL here")

    p_sim = sub.add_parser("simulate", help="oracle-driven session; writes the curve CSV")
    p_sim.add_argument("--corpus", required=True, help="gold-labeled corpus JSONL")
    p_sim.add_argument("--strategy", default="margin", choices=STRATEGY_NAMES)
    p_sim.add_argument("--seed-size", type=int, default=160)
    p_sim.add_argument("--batch", type=int, default=40)
    p_sim.add_argument("--rounds", type=int, default=10)
    p_sim.add_argument("--rng", type=int, default=0)
    p_sim.add_argument("--test-fraction", type=float, default=0.2)
    p_sim.add_argument("--embed", help="hash:<dim> or backend:<url> for corpora without embeddings")
    p_sim.add_argument("--out", required=True, help="output CSV path")

    p_cmp = sub.add_parser("compare", help="margin vs random with identical seeds")
    p_cmp.add_argument("--corpus", required=True)
    p_cmp.add_argument("--rng", type=int, default=0)
    p_cmp.add_argument("--seed-size", type=int, default=160)
    p_cmp.add_argument("--batch", type=int, default=40)
    p_cmp.add_argument("--rounds", type=int, default=10)
    p_cmp.add_argument("--test-fraction", type=float, default=0.2)
    p_cmp.add_argument("--gap", type=float, default=0.02, help="target = full-pool F1 - gap")
    p_cmp.add_argument("--embed", help="hash:<dim> or backend:<url> for corpora without embeddings")
    p_cmp.add_argument("--out", required=True, help="output directory")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--config", required=True, help="JSON service config file")

    return parser


def _load_corpus(path: str, embed: str | None) -> Corpus:
    corpus = ingest_corpus(Path(path).read_bytes())
    if embed:
        corpus = _apply_embed(corpus, embed)
    return corpus


def _apply_embed(corpus: Corpus, embed: str) -> Corpus:
    if embed.startswith("hash:"):
        try:
            dim = int(embed.split(":", 1)[1])
        except ValueError:
            raise LabelLoopError(f"bad --embed value {embed!r}; expected hash:<dim>") from None
        return attach_hash_embeddings(corpus, dim)
    if embed.startswith("backend:"):
        url = embed.split(":", 1)[1]
        with BackendClient(url) as client:
            missing = [doc for doc in corpus if doc.embedding is None]
            if missing:
                vectors = client.embed_in_batches([doc.text for doc in missing])
                for doc, vec in zip(missing, vectors):
                    doc.embedding = vec
        return Corpus(list(corpus.documents), label_set=corpus.label_set)
    raise LabelLoopError(f"bad --embed value {embed!r}; expected hash:<dim> or backend:<url>")


def _session_config(corpus: Corpus, args: argparse.Namespace, strategy: str) -> SessionConfig:
    if len(corpus.label_set) < 2:
        raise LabelLoopError(
            f"corpus defines {len(corpus.label_set)} gold label(s); simulation needs at least 2"
        )
    return SessionConfig(
        label_set=list(corpus.label_set),
        test_fraction=args.test_fraction,
        n_seed=args.seed_size,
        batch_size=args.batch,
        max_rounds=args.rounds,
        strategy=QueryStrategy(strategy),
        rng_seed=args.rng,
    )


def cmd_ingest(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.jsonl, args.embed)
    if args.out:
        Path(args.out).write_bytes(corpus_to_jsonl(corpus))
    stats = corpus_stats(corpus)
    dim = corpus.dim if corpus.dim is not None else "-"
    print(f"documents: {len(corpus)}  dim: {dim}  gold-labeled: {stats.total}")
    for label in corpus.label_set:
        print(f"  {label}: {stats.counts[label]} ({stats.fractions[label]:.1%})")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.embed)
    config = _session_config(corpus, args, args.strategy)
    history = run_simulation(corpus, config)
    csv_bytes = export_history(history, label_order=list(config.label_set))
    Path(args.out).write_bytes(csv_bytes)
    last = history[-1]
    f1 = f"{last.macro_f1:.4f}" if last.macro_f1 is not None else "-"
    print(f"rounds: {len(history)}  labels: {last.n_labeled}  final macro-F1: {f1}")
    print(f"wrote {args.out}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.embed)
    config = _session_config(corpus, args, "margin")
    result = compare_strategies(corpus, config, gap=args.gap)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = list(config.label_set)
    (out_dir / "margin.csv").write_bytes(export_history(result.margin_history, labels))
    (out_dir / "random.csv").write_bytes(export_history(result.random_history, labels))
    summary = {
        "full_pool_f1": result.full_pool_f1,
        "target_f1": result.target_f1,
        "margin": {
            "labels_to_target": result.margin_labels_to_target,
            "final_macro_f1": result.margin_history[-1].macro_f1,
        },
        "random": {
            "labels_to_target": result.random_labels_to_target,
            "final_macro_f1": result.random_history[-1].macro_f1,
        },
    }
    (out_dir / "summary.json").write_bytes(
        (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode("utf-8")
    )
    print(f"full-pool macro-F1: {result.full_pool_f1:.4f}  target: {result.target_f1:.4f}")
    print(f"margin labels-to-target: {result.margin_labels_to_target}")
    print(f"random labels-to-target: {result.random_labels_to_target}")
    print(f"wrote {out_dir}/margin.csv {out_dir}/random.csv {out_dir}/summary.json")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise LabelLoopError("service config must be a JSON object")
    allowed = {"host", "port", "data_dir", "backend_url", "max_body_bytes"}
    unknown = set(raw) - allowed
    if unknown:
        raise LabelLoopError(f"unknown service config keys: {sorted(unknown)}")
    serve(ServiceConfig(**raw))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    handlers = {
        "ingest": cmd_ingest,
        "simulate": cmd_simulate,
        "compare": cmd_compare,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (LabelLoopError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
