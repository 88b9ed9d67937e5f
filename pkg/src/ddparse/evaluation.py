"""Attachment-score metrics and report emission.

UAS is the fraction of EDUs whose head is predicted correctly, with the
root EDU counting through its virtual-root attachment.  LAS comes in
two modes: against gold dependencies (relation correctness only, for
predictions produced on the gold structure) and against predicted
dependencies (head and relation both right).  Breakdowns cover the
intra/inter split, per-relation precision/recall/F1, and relation
accuracy bucketed by the gold head distance.

All corpus-level figures are node-weighted micro-averages, so the
intra/inter breakdown recombines exactly to the overall UAS.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import Document, DependencyTree, ROOT_LABEL

log = logging.getLogger("ddparse")

GOLD_HEADS = "gold-heads"
PREDICTED_HEADS = "predicted-heads"
MAX_SPAN_BUCKET = 9


class EvaluationError(ValueError):
    """Raised when gold and predicted inputs do not line up."""


@dataclass
class RelationScore:
    precision: float
    recall: float
    f1: float
    support: int
    never_predicted: bool = False

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "never_predicted": self.never_predicted,
        }


@dataclass
class Metrics:
    uas: float
    las_gold: float
    las_pred: float
    intra_uas: float
    inter_uas: float
    node_count: int
    intra_count: int
    inter_count: int
    per_relation_f1: dict[str, RelationScore] = field(default_factory=dict)
    per_span_accuracy: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "uas": self.uas,
            "las_gold": self.las_gold,
            "las_pred": self.las_pred,
            "intra_uas": self.intra_uas,
            "inter_uas": self.inter_uas,
            "node_count": self.node_count,
            "intra_count": self.intra_count,
            "inter_count": self.inter_count,
            "per_relation_f1": {k: v.to_dict() for k, v in self.per_relation_f1.items()},
            "per_span_accuracy": {str(k): v for k, v in self.per_span_accuracy.items()},
        }


def _check_lengths(gold: Sequence, pred: Sequence) -> None:
    if len(gold) != len(pred):
        raise EvaluationError(f"gold has {len(gold)} nodes, prediction has {len(pred)}")


def uas(gold_heads: Sequence[int], pred_heads: Sequence[int]) -> float:
    _check_lengths(gold_heads, pred_heads)
    correct = sum(1 for g, p in zip(gold_heads, pred_heads) if g == p)
    return correct / len(gold_heads)


def las(gold: DependencyTree, pred: DependencyTree, mode: str = PREDICTED_HEADS,
        count_root_relation: bool = True) -> float:
    """Labeled score.  Gold-heads mode scores relations alone (meaningful
    when the prediction labeled the gold structure); predicted-heads mode
    requires head and relation to both be correct.  With
    count_root_relation off, nodes whose gold relation is "ROOT" are
    dropped from the gold-heads denominator."""
    _check_lengths(gold.heads, pred.heads)
    if mode == GOLD_HEADS:
        nodes = [
            i for i in range(len(gold))
            if count_root_relation or gold.relations[i] != ROOT_LABEL
        ]
        if not nodes:
            return 0.0
        correct = sum(1 for i in nodes if gold.relations[i] == pred.relations[i])
        return correct / len(nodes)
    if mode == PREDICTED_HEADS:
        correct = sum(
            1 for i in range(len(gold))
            if gold.heads[i] == pred.heads[i] and gold.relations[i] == pred.relations[i]
        )
        return correct / len(gold)
    raise EvaluationError(f"unknown LAS mode {mode!r}")


def _breakdown_counts(doc: Document, gold: DependencyTree,
                      pred: DependencyTree) -> tuple[int, int, int, int]:
    _check_lengths(gold.heads, pred.heads)
    intra_correct = intra_total = inter_correct = inter_total = 0
    for i in range(1, len(doc) + 1):
        g, p = gold.heads[i - 1], pred.heads[i - 1]
        is_intra = g != 0 and doc.same_sentence(i, g)
        if is_intra:
            intra_total += 1
            intra_correct += g == p
        else:
            inter_total += 1
            inter_correct += g == p
    return intra_correct, intra_total, inter_correct, inter_total


def level_breakdown(doc: Document, gold: DependencyTree,
                    pred: DependencyTree) -> tuple[float, float]:
    """(intra UAS, inter UAS); a node is intra when its gold head lies in
    the same sentence, otherwise inter (which includes the root)."""
    ic, it, xc, xt = _breakdown_counts(doc, gold, pred)
    return (ic / it if it else 1.0, xc / xt if xt else 1.0)


def per_relation_f1(gold_relations: Sequence[str],
                    pred_relations: Sequence[str]) -> dict[str, RelationScore]:
    _check_lengths(gold_relations, pred_relations)
    labels = sorted(set(gold_relations) | set(pred_relations))
    scores = {}
    for label in labels:
        tp = sum(1 for g, p in zip(gold_relations, pred_relations) if g == p == label)
        gold_count = sum(1 for g in gold_relations if g == label)
        pred_count = sum(1 for p in pred_relations if p == label)
        precision = tp / pred_count if pred_count else 0.0
        recall = tp / gold_count if gold_count else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores[label] = RelationScore(precision, recall, f1, gold_count,
                                      never_predicted=pred_count == 0)
    return dict(sorted(scores.items(), key=lambda kv: (-kv[1].support, kv[0])))


def per_span_accuracy(gold: DependencyTree, pred: DependencyTree) -> dict[int, float]:
    """Relation accuracy bucketed by |EDU - gold head|; the top bucket
    pools distances of 9 and above, the root has no distance."""
    _check_lengths(gold.heads, pred.heads)
    return _bucket_accuracy([(gold, pred)])


def _bucket_accuracy(pairs) -> dict[int, float]:
    totals: dict[int, list[int]] = {}
    for gold, pred in pairs:
        for i in range(1, len(gold) + 1):
            h = gold.heads[i - 1]
            if h == 0:
                continue
            bucket = min(abs(i - h), MAX_SPAN_BUCKET)
            cell = totals.setdefault(bucket, [0, 0])
            cell[0] += gold.relations[i - 1] == pred.relations[i - 1]
            cell[1] += 1
    return {b: c / t for b, (c, t) in sorted(totals.items())}


def evaluate_corpus(gold_corpus: list[tuple[Document, DependencyTree]],
                    pred_corpus: list[tuple[Document, DependencyTree]],
                    count_root_relation: bool = True) -> Metrics:
    """Micro-averaged metrics over aligned gold and predicted corpora."""
    if len(gold_corpus) != len(pred_corpus):
        raise EvaluationError(
            f"gold corpus has {len(gold_corpus)} documents, predictions have {len(pred_corpus)}"
        )
    head_correct = las_pred_correct = 0
    ic = it = xc = xt = 0
    gold_rel_all, pred_rel_all = [], []
    las_gold_correct = las_gold_total = 0
    node_count = 0
    known_labels = gold_corpus_labels(gold_corpus)
    warned: set[str] = set()
    for (gdoc, gold), (pdoc, pred) in zip(gold_corpus, pred_corpus):
        if gdoc.doc_id != pdoc.doc_id:
            log.warning("event=doc_id_mismatch gold=%s pred=%s", gdoc.doc_id, pdoc.doc_id)
        _check_lengths(gold.heads, pred.heads)
        node_count += len(gold)
        for i in range(len(gold)):
            head_ok = gold.heads[i] == pred.heads[i]
            rel_ok = gold.relations[i] == pred.relations[i]
            head_correct += head_ok
            las_pred_correct += head_ok and rel_ok
            if count_root_relation or gold.relations[i] != ROOT_LABEL:
                las_gold_total += 1
                las_gold_correct += rel_ok
            if pred.relations[i] not in known_labels and pred.relations[i] not in warned:
                warned.add(pred.relations[i])
                log.warning("event=unknown_relation label=%s", pred.relations[i])
        a, b, c, d = _breakdown_counts(gdoc, gold, pred)
        ic, it, xc, xt = ic + a, it + b, xc + c, xt + d
        gold_rel_all.extend(gold.relations)
        pred_rel_all.extend(pred.relations)

    spans = _bucket_accuracy(
        [(gold, pred) for (_, gold), (_, pred) in zip(gold_corpus, pred_corpus)])
    return Metrics(
        uas=head_correct / node_count,
        las_gold=las_gold_correct / las_gold_total if las_gold_total else 0.0,
        las_pred=las_pred_correct / node_count,
        intra_uas=ic / it if it else 1.0,
        inter_uas=xc / xt if xt else 1.0,
        node_count=node_count,
        intra_count=it,
        inter_count=xt,
        per_relation_f1=per_relation_f1(gold_rel_all, pred_rel_all),
        per_span_accuracy=spans,
    )


def gold_corpus_labels(corpus) -> set[str]:
    return {r for _, tree in corpus for r in tree.relations}


def format_table(metrics: Metrics) -> str:
    """Plain-text summary table for the eval report."""
    lines = [
        "metric          value",
        "--------------  ------",
        f"UAS             {metrics.uas:.4f}",
        f"LAS (gold)      {metrics.las_gold:.4f}",
        f"LAS (pred)      {metrics.las_pred:.4f}",
        f"intra UAS       {metrics.intra_uas:.4f}  ({metrics.intra_count} nodes)",
        f"inter UAS       {metrics.inter_uas:.4f}  ({metrics.inter_count} nodes)",
        "",
        "relation              P      R      F1  support",
        "------------------  -----  -----  -----  -------",
    ]
    for label, score in metrics.per_relation_f1.items():
        flag = " (never predicted)" if score.never_predicted else ""
        lines.append(
            f"{label:<18} {score.precision:6.3f} {score.recall:6.3f} "
            f"{score.f1:6.3f}  {score.support:7d}{flag}"
        )
    lines.append("")
    lines.append("head distance  relation accuracy")
    for bucket, acc in metrics.per_span_accuracy.items():
        name = f">={MAX_SPAN_BUCKET}" if bucket == MAX_SPAN_BUCKET else str(bucket)
        lines.append(f"{name:>13}  {acc:.4f}")
    return "\n".join(lines)
