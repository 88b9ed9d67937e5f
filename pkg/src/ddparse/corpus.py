"""Corpus data model, NDJSON I/O, tree validation, connective deletion.

A corpus file is UTF-8 NDJSON, one document per line:

    {"doc_id": str,
     "edus": [{"id": int, "text": str, "tokens": [str]?,
               "sentence": int, "head": int, "relation": str}, ...]}

EDU ids are 1-based and consecutive; "sentence" is a 0-based,
non-decreasing sentence index from which sentence spans are derived;
"head" is another EDU id or 0 for the document root.  When "tokens" is
absent the text is whitespace-split.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

log = logging.getLogger("ddparse")

ROOT_LABEL = "ROOT"


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid trees."""


@dataclass(frozen=True)
class Edu:
    id: int
    text: str
    tokens: tuple[str, ...]
    sentence_index: int


@dataclass(frozen=True)
class Document:
    doc_id: str
    edus: tuple[Edu, ...]
    sentence_spans: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.edus)

    @property
    def num_sentences(self) -> int:
        return len(self.sentence_spans)

    def edu(self, edu_id: int) -> Edu:
        return self.edus[edu_id - 1]

    def sentence_of(self, edu_id: int) -> int:
        return self.edus[edu_id - 1].sentence_index

    def sentence_ids(self, sentence_index: int) -> list[int]:
        first, last = self.sentence_spans[sentence_index]
        return list(range(first, last + 1))

    def same_sentence(self, a: int, b: int) -> bool:
        return self.sentence_of(a) == self.sentence_of(b)


@dataclass(frozen=True)
class DependencyTree:
    """Heads and relation labels over the EDUs of one document.

    heads[i-1] is the head id of EDU i, with 0 denoting the virtual
    root; the root EDU carries the reserved "ROOT" relation.
    """

    heads: tuple[int, ...]
    relations: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.heads)

    def head_of(self, edu_id: int) -> int:
        return self.heads[edu_id - 1]

    def relation_of(self, edu_id: int) -> str:
        return self.relations[edu_id - 1]

    @property
    def root(self) -> int:
        return self.heads.index(0) + 1

    def arcs(self) -> list[tuple[int, int]]:
        """All (head, dependent) pairs, excluding the virtual-root arc."""
        return [(h, d + 1) for d, h in enumerate(self.heads) if h != 0]


@dataclass(frozen=True)
class RelationSet:
    """Ordered relation inventory; the ordering fixes output-layer indices."""

    labels: tuple[str, ...]
    index: dict[str, int] = field(init=False, hash=False, compare=False)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise CorpusError("relation labels must be unique")
        if ROOT_LABEL not in self.labels:
            raise CorpusError(f"relation set must contain {ROOT_LABEL!r}")
        object.__setattr__(self, "index", {r: i for i, r in enumerate(self.labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.index

    @classmethod
    def from_corpus(cls, corpus: list[tuple[Document, DependencyTree]]) -> "RelationSet":
        seen = sorted({r for _, tree in corpus for r in tree.relations} - {ROOT_LABEL})
        return cls((ROOT_LABEL, *seen))


@dataclass
class ValidationReport:
    problems: list[str]

    @property
    def ok(self) -> bool:
        return not self.problems

    def __str__(self) -> str:
        return "valid" if self.ok else "; ".join(self.problems)


def validate_tree(doc: Document | int, tree: DependencyTree) -> ValidationReport:
    """Check the structural tree invariants: single root, acyclic, projective.

    `doc` may be a Document or a plain EDU count.  A length mismatch
    between document and tree is an error, not a report entry.
    """
    l = doc if isinstance(doc, int) else len(doc)
    if len(tree.heads) != l or len(tree.relations) != l:
        raise CorpusError(
            f"tree arrays have length {len(tree.heads)}/{len(tree.relations)}, expected {l}"
        )
    problems = []
    for i, h in enumerate(tree.heads, start=1):
        if not 0 <= h <= l:
            problems.append(f"head of EDU {i} out of range: {h}")
        elif h == i:
            problems.append(f"EDU {i} is its own head")
    if problems:
        return ValidationReport(problems)

    roots = [i for i, h in enumerate(tree.heads, start=1) if h == 0]
    if not roots:
        problems.append("no root")
    elif len(roots) > 1:
        problems.append(f"multiple roots: {roots}")

    # Cycle check: every EDU must reach the virtual root by following heads.
    for start in range(1, l + 1):
        seen = set()
        node = start
        while node != 0:
            if node in seen:
                problems.append(f"cycle through EDU {start}")
                break
            seen.add(node)
            node = tree.heads[node - 1]

    if problems:
        return ValidationReport(problems)

    if not _projective(tree.heads):
        problems.append("non-projective")
    return ValidationReport(problems)


def _projective(heads: tuple[int, ...]) -> bool:
    """Projectivity as planarity: arcs drawn above the sequence, with the
    virtual root at position 0, never cross."""
    arcs = [(min(h, d), max(h, d)) for d, h in enumerate(heads, start=1)]
    for i, (a, b) in enumerate(arcs):
        for c, d in arcs[i + 1:]:
            if len({a, b, c, d}) == 4 and (a < c < b < d or c < a < d < b):
                return False
    return True


def is_projective(tree: DependencyTree) -> bool:
    return _projective(tree.heads)


def _parse_record(record: dict, line_no: int) -> tuple[Document, DependencyTree]:
    try:
        doc_id = record["doc_id"]
        raw_edus = record["edus"]
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"line {line_no}: missing field {exc}") from None
    if not raw_edus:
        raise CorpusError(f"line {line_no}: document has no EDUs")

    edus, heads, relations = [], [], []
    for pos, raw in enumerate(raw_edus, start=1):
        try:
            edu_id = int(raw["id"])
            text = raw["text"]
            sentence = int(raw["sentence"])
            head = int(raw["head"])
            relation = raw["relation"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"line {line_no}: bad EDU record: {exc}") from None
        if edu_id != pos:
            raise CorpusError(
                f"line {line_no}: EDU ids must be consecutive from 1, got {edu_id} at position {pos}"
            )
        tokens = tuple(raw["tokens"]) if "tokens" in raw else tuple(text.split())
        if not tokens:
            raise CorpusError(f"line {line_no}: EDU {edu_id} has no tokens")
        edus.append(Edu(edu_id, text, tokens, sentence))
        heads.append(head)
        relations.append(relation)

    spans = []
    for edu in edus:
        expected = len(spans) - 1
        if edu.sentence_index == expected + 1:
            spans.append([edu.id, edu.id])
        elif edu.sentence_index == expected:
            spans[-1][1] = edu.id
        else:
            raise CorpusError(
                f"line {line_no}: sentence index {edu.sentence_index} of EDU {edu.id} "
                f"is not contiguous"
            )

    doc = Document(doc_id, tuple(edus), tuple((a, b) for a, b in spans))
    tree = DependencyTree(tuple(heads), tuple(relations))
    report = validate_tree(doc, tree)
    structural = [p for p in report.problems if p != "non-projective"]
    if structural:
        raise CorpusError(f"line {line_no}: invalid tree: {'; '.join(structural)}")
    return doc, tree


def load_corpus(path) -> list[tuple[Document, DependencyTree]]:
    """Load an NDJSON corpus file.

    Structurally invalid trees (cycles, multiple roots) abort with an
    error naming the line; non-projective gold trees are retained and
    counted, since they remain usable for evaluation.
    """
    corpus = []
    non_projective = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_no}: invalid JSON: {exc.msg}") from None
            doc, tree = _parse_record(record, line_no)
            if not is_projective(tree):
                non_projective += 1
            corpus.append((doc, tree))
    log.info("event=load_corpus path=%s docs=%d non_projective=%d",
             path, len(corpus), non_projective)
    return corpus


def save_corpus(corpus: list[tuple[Document, DependencyTree]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc, tree in corpus:
            record = {
                "doc_id": doc.doc_id,
                "edus": [
                    {
                        "id": edu.id,
                        "text": edu.text,
                        "tokens": list(edu.tokens),
                        "sentence": edu.sentence_index,
                        "head": tree.heads[edu.id - 1],
                        "relation": tree.relations[edu.id - 1],
                    }
                    for edu in doc.edus
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_lexicon(path) -> list[str]:
    """Connective lexicon: one lowercase token per line, '#' comments."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                entries.append(line.lower())
    return entries


def delete_connectives(doc: Document, lexicon: list[str]) -> Document:
    """Drop the leading token of each EDU whose leading token matches the
    lexicon (case-insensitive).  An EDU that would become empty is left
    unchanged; ids, sentence spans and any associated tree are unaffected.
    """
    if not lexicon:
        raise ValueError("lexicon is empty")
    wanted = {entry.lower() for entry in lexicon}
    new_edus = []
    for edu in doc.edus:
        if len(edu.tokens) > 1 and edu.tokens[0].lower() in wanted:
            tokens = edu.tokens[1:]
            new_edus.append(replace(edu, tokens=tokens, text=" ".join(tokens)))
        else:
            new_edus.append(edu)
    return replace(doc, edus=tuple(new_edus))
