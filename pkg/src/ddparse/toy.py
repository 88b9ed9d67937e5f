"""Deterministic synthetic corpus for end-to-end pipeline checks.

Twenty documents of 2-4 sentences with 1-4 EDUs each.  Every EDU's text
spells out its own attachment role and relation label through marker
tokens ("h=prev r=elab-addition w3" and the like), so the corpus is
fully learnable from the built-in encoder alone: the tree patterns are
per-sentence chains and stars, sentence roots connect as a chain or a
star announced by a "d=..." marker, and the relation of every EDU is
printed in its text.  Identical seeds give byte-identical files.
"""

from __future__ import annotations

import random

from .corpus import Document, DependencyTree, Edu, ROOT_LABEL, save_corpus

SENTENCE_PATTERNS = ("chain_prev", "chain_next", "star_first")
DOC_PATTERNS = ("chain", "star")

INTRA_RELATION = {
    "chain_prev": "elab-addition",
    "chain_next": "attribution",
    "star_first": "joint",
}
INTER_RELATION = {
    "chain": ("evaluation", "elab-aspect"),
    "star": ("bg-general", "contrast"),
}


def _sentence_structure(pattern: str, first: int, length: int) -> tuple[dict[int, int], int]:
    """Head map (root mapped to 0) and root id for one sentence."""
    last = first + length - 1
    if length == 1:
        return {first: 0}, first
    if pattern == "chain_prev":
        heads = {first: 0, **{j: j - 1 for j in range(first + 1, last + 1)}}
        return heads, first
    if pattern == "chain_next":
        heads = {last: 0, **{j: j + 1 for j in range(first, last)}}
        return heads, last
    heads = {first: 0, **{j: first for j in range(first + 1, last + 1)}}
    return heads, first


def make_toy_corpus(seed: int = 42, docs: int = 20) -> list[tuple[Document, DependencyTree]]:
    rng = random.Random(seed)
    corpus = []
    for d in range(docs):
        n_sentences = rng.randint(2, 4)
        lengths = [rng.randint(1, 4) for _ in range(n_sentences)]
        doc_pattern = rng.choice(DOC_PATTERNS)

        edus: list[Edu] = []
        heads: dict[int, int] = {}
        relations: dict[int, str] = {}
        roles: dict[int, str] = {}
        roots: list[int] = []
        first = 1
        for s, length in enumerate(lengths):
            pattern = rng.choice(SENTENCE_PATTERNS) if length > 1 else "chain_prev"
            sent_heads, root = _sentence_structure(pattern, first, length)
            roots.append(root)
            for j in range(first, first + length):
                heads[j] = sent_heads[j]
                if j == root:
                    roles[j] = "h=root"
                elif pattern == "chain_prev":
                    roles[j] = "h=prev"
                    relations[j] = INTRA_RELATION[pattern]
                elif pattern == "chain_next":
                    roles[j] = "h=next"
                    relations[j] = INTRA_RELATION[pattern]
                else:
                    roles[j] = "h=first"
                    relations[j] = INTRA_RELATION[pattern]
            first += length

        for s, root in enumerate(roots):
            if s == 0:
                relations[root] = ROOT_LABEL
            else:
                heads[root] = roots[0] if doc_pattern == "star" else roots[s - 1]
                relations[root] = INTER_RELATION[doc_pattern][s % 2]

        first = 1
        for s, length in enumerate(lengths):
            for j in range(first, first + length):
                tokens = [roles[j], f"r={relations[j]}"]
                if j in roots:
                    tokens.append(f"d={doc_pattern}")
                tokens.append(f"w{j % 7}")
                edus.append(Edu(j, " ".join(tokens), tuple(tokens), s))
            first += length

        l = len(edus)
        doc = Document(
            doc_id=f"toy-{d:03d}",
            edus=tuple(edus),
            sentence_spans=tuple(
                (sum(lengths[:s]) + 1, sum(lengths[:s + 1])) for s in range(n_sentences)
            ),
        )
        tree = DependencyTree(
            tuple(heads[i] for i in range(1, l + 1)),
            tuple(relations[i] for i in range(1, l + 1)),
        )
        corpus.append((doc, tree))
    return corpus


def write_toy_corpus(path, seed: int = 42, docs: int = 20) -> None:
    save_corpus(make_toy_corpus(seed, docs), path)
