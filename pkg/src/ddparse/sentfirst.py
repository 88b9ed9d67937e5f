"""Two-level Sent-First parsing pipeline.

Each sentence is parsed independently with the intra-sentential model;
the sentence roots are concatenated, in document order, into a pseudo
sequence that the inter-sentential model parses; the two levels are
assembled into one document tree.  By construction exactly one EDU per
sentence (its root) connects to the outside.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import transition
from .corpus import Document, DependencyTree, ROOT_LABEL, validate_tree
from .encoder import EmbeddingError
from .transition import ParserState

log = logging.getLogger("ddparse")

FEATURE_SLOTS = 6
UNLABELED = "_"


@dataclass(frozen=True)
class SentenceParse:
    sentence_index: int
    heads: dict[int, int]
    root_edu: int


def state_feature(state: ParserState, embeddings: Mapping[int, np.ndarray],
                  dim: int) -> np.ndarray:
    """Six-slot feature: the two topmost stack EDUs, the two first queue
    EDUs, and the already-identified heads of the two stack EDUs; empty
    slots contribute zero vectors."""
    s0 = state.stack[-1] if state.stack else None
    s1 = state.stack[-2] if len(state.stack) > 1 else None
    q0 = state.queue[0] if state.queue else None
    q1 = state.queue[1] if len(state.queue) > 1 else None
    h0 = state.head_of(s0) if s0 is not None else None
    h1 = state.head_of(s1) if s1 is not None else None
    slots = (s0, s1, q0, q1, h0, h1)
    feature = np.zeros(FEATURE_SLOTS * dim)
    for pos, edu_id in enumerate(slots):
        if edu_id is None:
            continue
        vector = embeddings.get(edu_id)
        if vector is None:
            raise EmbeddingError(f"no embedding for EDU {edu_id} in state feature")
        feature[pos * dim:(pos + 1) * dim] = vector
    return feature


def action_scorer(model, embeddings: Mapping[int, np.ndarray], dim: int):
    """Wrap an action model as a decode score function."""
    return lambda state: model.forward(state_feature(state, embeddings, dim))


def parse_sentence(doc: Document, sentence_index: int, model,
                   embeddings: Mapping[int, np.ndarray], dim: int) -> SentenceParse:
    span = doc.sentence_ids(sentence_index)
    heads = transition.decode(span, action_scorer(model, embeddings, dim))
    root = next(i for i, h in heads.items() if h == 0)
    return SentenceParse(sentence_index, heads, root)


def assemble(intra: list[SentenceParse], inter_heads: Mapping[int, int]) -> DependencyTree:
    """Merge per-sentence trees with the tree over their roots.

    inter_heads maps every sentence root to another root, or to 0 for
    the one that becomes the document root.  Relations are left
    unlabeled except for the root.
    """
    roots = [parse.root_edu for parse in intra]
    if set(inter_heads) != set(roots) or len(roots) != len(set(roots)):
        raise ValueError(
            f"inter tree nodes {sorted(inter_heads)} do not match sentence roots {sorted(roots)}"
        )
    total = sum(len(parse.heads) for parse in intra)
    heads = [0] * total
    for parse in intra:
        for dep, head in parse.heads.items():
            heads[dep - 1] = inter_heads[dep] if head == 0 else head
    relations = tuple(
        ROOT_LABEL if heads[i] == 0 else UNLABELED for i in range(total)
    )
    tree = DependencyTree(tuple(heads), relations)
    report = validate_tree(total, tree)
    if not report.ok:
        raise ValueError(f"assembled tree invalid: {report}")
    return tree


def parse_document(doc: Document, intra_model, inter_model, encoder) -> DependencyTree:
    """Run the full pipeline: intra parses, inter parse over roots, assembly."""
    intra_embeddings = encoder.intra(doc)
    parses = [
        parse_sentence(doc, s, intra_model, intra_embeddings, encoder.dim)
        for s in range(doc.num_sentences)
    ]
    roots = [parse.root_edu for parse in parses]
    inter_embeddings = encoder.inter(doc, roots)
    inter_heads = transition.decode(
        roots, action_scorer(inter_model, inter_embeddings, encoder.dim))
    return assemble(parses, inter_heads)


# --- gold-tree decomposition for oracle extraction ----------------------------


def sentence_roots(doc: Document, tree: DependencyTree) -> list[int]:
    """The EDUs whose head lies outside their own sentence, document order."""
    roots = []
    for first, last in doc.sentence_spans:
        for i in range(first, last + 1):
            h = tree.heads[i - 1]
            if h == 0 or not first <= h <= last:
                roots.append(i)
    return roots


def decompose(doc: Document, tree: DependencyTree):
    """Split a gold tree into per-sentence spans and the root span.

    Returns (intra, inter) where intra is a list of (sentence_index,
    span, gold head map) and inter is (roots, gold head map) or None.
    Sentences with several outside-headed EDUs, and restrictions that
    come out non-projective, cannot be expressed by the pipeline; they
    are dropped with a log line and a None/omitted entry.
    """
    heads_by_id = {i: tree.heads[i - 1] for i in range(1, len(doc) + 1)}
    intra = []
    roots_per_sentence = []
    for s, (first, last) in enumerate(doc.sentence_spans):
        span = doc.sentence_ids(s)
        gold = transition.span_heads_from_tree(span, heads_by_id)
        span_roots = [i for i, h in gold.items() if h == 0]
        if len(span_roots) != 1:
            log.info("event=skip_sentence doc=%s sentence=%d outsiders=%d",
                     doc.doc_id, s, len(span_roots))
            roots_per_sentence.append(None)
            continue
        if not transition.is_valid_span_tree(span, gold):
            log.info("event=skip_sentence doc=%s sentence=%d reason=non-projective",
                     doc.doc_id, s)
            roots_per_sentence.append(None)
            continue
        roots_per_sentence.append(span_roots[0])
        intra.append((s, span, gold))

    inter = None
    if all(r is not None for r in roots_per_sentence):
        roots = [r for r in roots_per_sentence if r is not None]
        root_of_sentence = {s: r for s, r in enumerate(roots_per_sentence)}
        gold = {}
        for r in roots:
            h = tree.heads[r - 1]
            gold[r] = 0 if h == 0 else root_of_sentence[doc.sentence_of(h)]
        if transition.is_valid_span_tree(roots, gold):
            inter = (roots, gold)
        else:
            log.info("event=skip_document doc=%s reason=inter-non-projective", doc.doc_id)
    return intra, inter


def oracle_training_data(corpus, encoder, level: str) -> list[tuple[np.ndarray, int]]:
    """(state feature, action index) pairs from static-oracle replays."""
    data = []
    for doc, tree in corpus:
        intra, inter = decompose(doc, tree)
        if level == "intra":
            embeddings = encoder.intra(doc)
            spans = [(span, gold) for _, span, gold in intra]
        elif level == "inter":
            if inter is None:
                continue
            roots, gold = inter
            embeddings = encoder.inter(doc, roots)
            spans = [(roots, gold)]
        else:
            raise ValueError(f"unknown level {level!r}")
        for span, gold in spans:
            if len(span) < 2:
                continue
            state = transition.initial_state(span)
            for action in transition.oracle_actions(span, gold):
                data.append((state_feature(state, embeddings, encoder.dim), action.value))
                state = transition.apply(state, action)
    return data


def document_oracles(doc: Document, tree: DependencyTree):
    """(sentence index | None, action names) records for the oracle output."""
    intra, inter = decompose(doc, tree)
    records = []
    for s, span, gold in intra:
        actions = transition.oracle_actions(span, gold)
        records.append((s, [a.name for a in actions]))
    if inter is not None:
        roots, gold = inter
        actions = transition.oracle_actions(roots, gold)
        records.append((None, [a.name for a in actions]))
    return records
