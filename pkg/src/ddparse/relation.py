"""Relation identification as stacked sequence labeling over EDU pairs.

Every EDU is tiled with its head into a pair representation (reordered
to document order), a sinusoidal position embedding of the EDU's
sentence number and in-sentence position is added elementwise, and a
first tagger labels the full sequence.  A second tagger labels the
subsequence of sentence-root pairs and overwrites the first layer's
predictions there; the document root is always labeled "ROOT".  A
direct per-pair classifier is kept as the non-sequential baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document, DependencyTree, RelationSet, ROOT_LABEL
from .encoder import EmbeddingError
from .sentfirst import sentence_roots


@dataclass(frozen=True)
class PairRepr:
    e_id: int
    h_id: int
    ordered: tuple[int, int]
    vector: np.ndarray
    pe: np.ndarray

    @property
    def combined(self) -> np.ndarray:
        return self.vector + self.pe


def position_embedding(no: int, in_sentence: int, dim: int) -> np.ndarray:
    """Component j is sin(no / 10000^(j/dim)) + cos(in_sentence / 10000^(j/dim)).

    `no` is the 0-based sentence number in the discourse, `in_sentence`
    the 0-based position of the EDU inside its sentence.  Every
    component lies in [-2, 2]; both arguments at zero give all ones.
    """
    if no < 0 or in_sentence < 0 or dim < 1:
        raise ValueError(f"bad position embedding arguments ({no}, {in_sentence}, {dim})")
    j = np.arange(dim, dtype=np.float64)
    freq = 10000.0 ** (j / dim)
    return np.sin(no / freq) + np.cos(in_sentence / freq)


def edu_positions(doc: Document, edu_id: int) -> tuple[int, int]:
    sentence = doc.sentence_of(edu_id)
    first, _ = doc.sentence_spans[sentence]
    return sentence, edu_id - first


def build_pair_sequence(doc: Document, tree: DependencyTree,
                        pair_vectors: dict[tuple[int, int], np.ndarray]) -> list[PairRepr]:
    """One PairRepr per EDU in id order; the root EDU pairs with key (e, 0)."""
    sequence = []
    for e in range(1, len(doc) + 1):
        h = tree.heads[e - 1]
        key = (e, h)
        vector = pair_vectors.get(key)
        if vector is None:
            raise EmbeddingError(f"no pair embedding for {key} of {doc.doc_id}")
        ordered = (e, 0) if h == 0 else (min(e, h), max(e, h))
        no, in_sentence = edu_positions(doc, e)
        pe = position_embedding(no, in_sentence, vector.shape[0])
        sequence.append(PairRepr(e, h, ordered, vector, pe))
    return sequence


def classify_direct(model, pair_vector: np.ndarray) -> str:
    """Single-pair baseline: argmax over the classifier output, ties going
    to the lowest label index."""
    probs = model.forward(pair_vector)
    return model.labels[int(np.argmax(probs))]


def label_relations(doc: Document, tree: DependencyTree, intra_tagger,
                    inter_tagger, encoder) -> tuple[str, ...]:
    """Stacked labeling: layer one tags all pairs, layer two re-tags the
    sentence-root pairs, and the document root is forced to "ROOT"."""
    pairs = [(e, tree.heads[e - 1]) for e in range(1, len(doc) + 1)]
    pair_vectors = encoder.pair(doc, pairs)
    sequence = build_pair_sequence(doc, tree, pair_vectors)
    inputs = np.stack([p.combined for p in sequence])

    probs = intra_tagger.forward(inputs)
    labels = [intra_tagger.labels[int(np.argmax(row))] for row in probs]

    roots = sentence_roots(doc, tree)
    if roots:
        root_inputs = np.stack([sequence[r - 1].combined for r in roots])
        root_probs = inter_tagger.forward(root_inputs)
        for r, row in zip(roots, root_probs):
            labels[r - 1] = inter_tagger.labels[int(np.argmax(row))]

    labels[tree.root - 1] = ROOT_LABEL
    return tuple(labels)


# --- training data -------------------------------------------------------------


def tagger_training_data(corpus, encoder, relations: RelationSet,
                         level: str) -> list[tuple[np.ndarray, np.ndarray]]:
    """(input sequence, gold label indices) pairs for one tagger level."""
    data = []
    for doc, tree in corpus:
        pairs = [(e, tree.heads[e - 1]) for e in range(1, len(doc) + 1)]
        sequence = build_pair_sequence(doc, tree, encoder.pair(doc, pairs))
        if level == "intra":
            chosen = list(range(1, len(doc) + 1))
        elif level == "inter":
            chosen = sentence_roots(doc, tree)
        else:
            raise ValueError(f"unknown level {level!r}")
        if not chosen:
            continue
        xs = np.stack([sequence[e - 1].combined for e in chosen])
        ys = np.array([relations.index[tree.relations[e - 1]] for e in chosen], dtype=np.intp)
        data.append((xs, ys))
    return data


def direct_training_data(corpus, encoder,
                         relations: RelationSet) -> list[tuple[np.ndarray, int]]:
    """(pair vector, gold label index) pairs for the direct classifier."""
    data = []
    for doc, tree in corpus:
        pairs = [(e, tree.heads[e - 1]) for e in range(1, len(doc) + 1)]
        vectors = encoder.pair(doc, pairs)
        for e, h in pairs:
            data.append((vectors[(e, h)], relations.index[tree.relations[e - 1]]))
    return data
