"""Command-line entry point.

Subcommands: train, parse, label, eval, oracle, verify-bounds,
encode-builtin, make-toy-corpus.  All runs are deterministic given
their flags and --seed; diagnostics go to standard error as key=value
lines, outputs only to the declared files or standard output.

Exit codes: 0 success, 1 data or model error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__, bounds, figures, neural, relation, sentfirst, toy
from .corpus import (CorpusError, DependencyTree, RelationSet, load_corpus,
                     save_corpus)
from .encoder import (BuiltinEncoder, EmbeddingError, EmbeddingTable,
                      TableEncoder, load_embeddings, save_embeddings)
from .evaluation import EvaluationError, evaluate_corpus, format_table
from .neural import ModelError, TrainConfig
from .transition import TransitionError

log = logging.getLogger("ddparse")

DEFAULT_DIM = 64


class UsageError(Exception):
    """Flag combinations that argparse alone cannot reject."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddparse",
        description="Sent-First discourse dependency parsing toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, corpus=True):
        if corpus:
            p.add_argument("--corpus", required=True, help="corpus NDJSON file")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--dim", type=int, default=DEFAULT_DIM,
                       help="built-in encoder dimension")
        p.add_argument("--embeddings", default=None,
                       help="embedding NDJSON file (default: built-in encoder)")

    p = sub.add_parser("train", help="train one model of the pipeline")
    add_common(p)
    p.add_argument("--level", choices=("intra", "inter"), default="intra")
    p.add_argument("--task", choices=("tree", "relation", "direct"), default="tree")
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--hidden", type=int, default=None,
                   help="hidden width (defaults: 128 feed-forward, 256 tagger)")

    p = sub.add_parser("parse", help="predict tree structure")
    add_common(p)
    p.add_argument("--model", action="append", required=True,
                   help="intra then inter tree model (give the flag twice)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("label", help="predict relations on existing trees")
    add_common(p)
    p.add_argument("--model", action="append", required=True,
                   help="intra then inter tagger model (give the flag twice)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--corpus", required=True, help="gold corpus NDJSON")
    p.add_argument("--pred", required=True, help="predicted corpus NDJSON")
    p.add_argument("--out", default=None, help="JSON report file (default: stdout)")
    p.add_argument("--count-root-relation", choices=("true", "false"), default="true")
    p.add_argument("--figures-dir", default=None,
                   help="also render report figures into this directory")

    p = sub.add_parser("oracle", help="emit static-oracle action sequences")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify-bounds", help="check the search-space inequalities")
    p.add_argument("--theorem", type=int, choices=(1, 2), required=True)
    p.add_argument("--shape", default=None, help='sentence lengths, e.g. "2,3,1"')
    p.add_argument("--sweep-max", type=int, default=None,
                   help="check every shape with at most this many EDUs")
    p.add_argument("--out", default=None)
    p.add_argument("--figures-dir", default=None)

    p = sub.add_parser("encode-builtin", help="materialize built-in embeddings")
    add_common(p)
    p.add_argument("--levels", default="intra,inter,pair")
    p.add_argument("--out", required=True)

    p = sub.add_parser("make-toy-corpus", help="write the bundled synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--docs", type=int, default=20)

    return parser


def _encoder(args):
    if args.embeddings:
        return TableEncoder(load_embeddings(args.embeddings), seed=args.seed)
    return BuiltinEncoder(dim=args.dim, seed=args.seed)


def _two_models(paths: list[str]) -> tuple:
    if len(paths) != 2:
        raise UsageError("expected exactly two --model flags (intra first, inter second)")
    return neural.load_model(paths[0]), neural.load_model(paths[1])


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    enc = _encoder(args)
    relations = RelationSet.from_corpus(corpus)
    config = TrainConfig(learning_rate=args.lr, epochs=args.epochs, seed=args.seed)

    if args.task == "tree":
        data = sentfirst.oracle_training_data(corpus, enc, args.level)
        hidden = args.hidden or neural.DEFAULT_HIDDEN
        model = neural.FeedForward(sentfirst.FEATURE_SLOTS * enc.dim, hidden,
                                   output_dim=4, seed=args.seed)
    elif args.task == "relation":
        data = relation.tagger_training_data(corpus, enc, relations, args.level)
        hidden = args.hidden or neural.DEFAULT_RECURRENT
        model = neural.BiLstmTagger(enc.dim, hidden, len(relations),
                                    seed=args.seed, labels=relations.labels)
    else:
        data = relation.direct_training_data(corpus, enc, relations)
        hidden = args.hidden or neural.DEFAULT_HIDDEN
        model = neural.FeedForward(enc.dim, hidden, len(relations),
                                   seed=args.seed, labels=relations.labels)

    if not data:
        raise CorpusError("no training examples could be extracted")
    losses = neural.train(model, data, config)
    neural.save_model(model, args.model)
    log.info("event=train task=%s level=%s examples=%d first_loss=%.4f last_loss=%.4f",
             args.task, args.level, len(data), losses[0], losses[-1])
    return 0


def cmd_parse(args) -> int:
    corpus = load_corpus(args.corpus)
    intra_model, inter_model = _two_models(args.model)
    enc = _encoder(args)
    expected = sentfirst.FEATURE_SLOTS * enc.dim
    for m in (intra_model, inter_model):
        if m.input_dim != expected:
            raise ModelError(
                f"model expects input dim {m.input_dim}, encoder provides {expected}")
    predictions = [
        (doc, sentfirst.parse_document(doc, intra_model, inter_model, enc))
        for doc, _ in corpus
    ]
    save_corpus(predictions, args.out)
    log.info("event=parse docs=%d out=%s", len(predictions), args.out)
    return 0


def cmd_label(args) -> int:
    corpus = load_corpus(args.corpus)
    intra_tagger, inter_tagger = _two_models(args.model)
    if not intra_tagger.labels or not inter_tagger.labels:
        raise ModelError("tagger models must carry a relation label inventory")
    enc = _encoder(args)
    labeled = []
    for doc, tree in corpus:
        rels = relation.label_relations(doc, tree, intra_tagger, inter_tagger, enc)
        labeled.append((doc, DependencyTree(tree.heads, rels)))
    save_corpus(labeled, args.out)
    log.info("event=label docs=%d out=%s", len(labeled), args.out)
    return 0


def cmd_eval(args) -> int:
    gold = load_corpus(args.corpus)
    pred = load_corpus(args.pred)
    metrics = evaluate_corpus(gold, pred,
                              count_root_relation=args.count_root_relation == "true")
    report = json.dumps(metrics.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
    else:
        print(report)
    print(format_table(metrics))
    if args.figures_dir:
        paths = figures.render_metrics_figures(metrics, args.figures_dir)
        log.info("event=figures count=%d dir=%s", len(paths), args.figures_dir)
    log.info("event=eval uas=%.4f las_gold=%.4f las_pred=%.4f",
             metrics.uas, metrics.las_gold, metrics.las_pred)
    return 0


def cmd_oracle(args) -> int:
    corpus = load_corpus(args.corpus)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for doc, tree in corpus:
            for sentence, actions in sentfirst.document_oracles(doc, tree):
                record = {"doc_id": doc.doc_id, "sentence": sentence, "actions": actions}
                out.write(json.dumps(record) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_verify_bounds(args) -> int:
    if (args.shape is None) == (args.sweep_max is None):
        raise UsageError("give exactly one of --shape or --sweep-max")
    check = bounds.check_theorem1 if args.theorem == 1 else bounds.check_theorem2
    if args.shape:
        reports = [check(bounds.DocumentShape.parse(args.shape))]
    else:
        reports = bounds.sweep(args.theorem, args.sweep_max)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for report in reports:
            out.write(json.dumps(report.to_dict()) + "\n")
    finally:
        if args.out:
            out.close()
    if args.figures_dir:
        from pathlib import Path
        outdir = Path(args.figures_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        figures.bounds_figure(reports, outdir / f"bounds_theorem{args.theorem}.png")
    violations = [r for r in reports if not r.holds]
    log.info("event=verify_bounds theorem=%d shapes=%d violations=%d",
             args.theorem, len(reports), len(violations))
    return 1 if violations else 0


def cmd_encode_builtin(args) -> int:
    corpus = load_corpus(args.corpus)
    levels = [lv.strip() for lv in args.levels.split(",") if lv.strip()]
    unknown = set(levels) - {"intra", "inter", "pair"}
    if unknown:
        raise UsageError(f"unknown levels: {sorted(unknown)}")
    enc = BuiltinEncoder(dim=args.dim, seed=args.seed)
    table = EmbeddingTable(args.dim)
    for doc, tree in corpus:
        if "intra" in levels:
            for edu_id, vector in enc.intra(doc).items():
                table.put(doc.doc_id, "intra", edu_id, vector)
        if "inter" in levels:
            roots = sentfirst.sentence_roots(doc, tree)
            for edu_id, vector in enc.inter(doc, roots).items():
                table.put(doc.doc_id, "inter", edu_id, vector)
        if "pair" in levels:
            pairs = [(e, tree.heads[e - 1]) for e in range(1, len(doc) + 1)]
            for key, vector in enc.pair(doc, pairs).items():
                table.put(doc.doc_id, "pair", key, vector)
    save_embeddings(table, args.out)
    log.info("event=encode_builtin records=%d out=%s", len(table), args.out)
    return 0


def cmd_make_toy_corpus(args) -> int:
    toy.write_toy_corpus(args.out, seed=args.seed, docs=args.docs)
    log.info("event=make_toy_corpus out=%s seed=%d docs=%d", args.out, args.seed, args.docs)
    return 0


COMMANDS = {
    "train": cmd_train,
    "parse": cmd_parse,
    "label": cmd_label,
    "eval": cmd_eval,
    "oracle": cmd_oracle,
    "verify-bounds": cmd_verify_bounds,
    "encode-builtin": cmd_encode_builtin,
    "make-toy-corpus": cmd_make_toy_corpus,
}


def run(argv: list[str]) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ddparse: usage error: {exc}", file=sys.stderr)
        return 2
    except (CorpusError, EmbeddingError, ModelError, TransitionError,
            bounds.BoundsError, EvaluationError, OSError, ValueError) as exc:
        print(f"ddparse: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
