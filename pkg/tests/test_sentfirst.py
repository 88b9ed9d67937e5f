import numpy as np
import pytest

from ddparse import sentfirst as SF
from ddparse import transition as T
from ddparse.bounds import DocumentShape, enumerate_sentfirst_trees
from ddparse.corpus import DependencyTree, Document, Edu, validate_tree
from ddparse.encoder import BuiltinEncoder, EmbeddingError


def make_doc(sentence_lengths, doc_id="d"):
    edus, spans, next_id = [], [], 1
    for s, length in enumerate(sentence_lengths):
        first = next_id
        for _ in range(length):
            edus.append(Edu(next_id, f"word{next_id} tail", (f"word{next_id}", "tail"), s))
            next_id += 1
        spans.append((first, next_id - 1))
    return Document(doc_id, tuple(edus), tuple(spans))


class RandomScorer:
    """Stand-in action model: deterministic pseudo-random scores per state."""

    def __init__(self, seed, input_dim):
        self.rng = np.random.default_rng(seed)
        self.input_dim = input_dim

    def forward(self, x):
        return self.rng.random(4)


class TestStateFeature:
    def setup_method(self):
        self.emb = {i: np.full(8, float(i)) for i in range(1, 5)}

    def test_initial_state_fills_queue_slots_only(self):
        state = T.initial_state([1, 2, 3])
        feat = SF.state_feature(state, self.emb, 8)
        assert feat.shape == (48,)
        assert np.all(feat[:16] == 0)            # s0, s1 empty
        assert np.all(feat[16:24] == 1.0)        # q0 = EDU 1
        assert np.all(feat[24:32] == 2.0)        # q1 = EDU 2
        assert np.all(feat[32:] == 0)            # no heads yet

    def test_stack_and_queue_slots(self):
        state = T.ParserState((1,), (2,), frozenset(), (1, 2))
        feat = SF.state_feature(state, self.emb, 8)
        assert np.all(feat[:8] == 1.0)           # s0
        assert np.all(feat[8:16] == 0)           # s1 empty
        assert np.all(feat[16:24] == 2.0)        # q0
        assert np.all(feat[24:] == 0)

    def test_head_slot_reads_parsing_history(self):
        state = T.ParserState((2,), (3,), frozenset({(1, 2)}), (1, 2, 3))
        feat = SF.state_feature(state, self.emb, 8)
        assert np.all(feat[32:40] == 1.0)        # head of s0 is EDU 1

    def test_missing_embedding_names_edu(self):
        state = T.initial_state([9])
        with pytest.raises(EmbeddingError, match="EDU 9"):
            SF.state_feature(state, self.emb, 8)


class TestAssemble:
    def test_two_sentences(self):
        intra = [SF.SentenceParse(0, {1: 0, 2: 1}, 1),
                 SF.SentenceParse(1, {3: 0, 4: 3}, 3)]
        tree = SF.assemble(intra, {1: 0, 3: 1})
        assert tree.heads == (0, 1, 1, 3)
        assert tree.relations[0] == "ROOT"

    def test_single_sentence_is_identity(self):
        intra = [SF.SentenceParse(0, {1: 0, 2: 1, 3: 2}, 1)]
        tree = SF.assemble(intra, {1: 0})
        assert tree.heads == (0, 1, 2)

    def test_three_singleton_chain(self):
        intra = [SF.SentenceParse(s, {s + 1: 0}, s + 1) for s in range(3)]
        tree = SF.assemble(intra, {1: 0, 2: 1, 3: 2})
        assert tree.heads == (0, 1, 2)

    def test_node_mismatch_rejected(self):
        intra = [SF.SentenceParse(0, {1: 0, 2: 1}, 1)]
        with pytest.raises(ValueError, match="sentence roots"):
            SF.assemble(intra, {2: 0})


class TestParseDocument:
    def test_single_sentence_equals_intra_parse(self):
        doc = make_doc([3])
        enc = BuiltinEncoder(dim=16, seed=0)
        intra_model = RandomScorer(1, 96)
        inter_model = RandomScorer(2, 96)
        tree = SF.parse_document(doc, intra_model, inter_model, enc)
        direct = SF.parse_sentence(doc, 0, RandomScorer(1, 96), enc.intra(doc), 16)
        assert tree.heads == tuple(direct.heads[i] for i in (1, 2, 3))

    def test_two_singleton_sentences_decided_by_inter(self):
        doc = make_doc([1, 1])
        enc = BuiltinEncoder(dim=16, seed=0)
        tree = SF.parse_document(doc, RandomScorer(3, 96), RandomScorer(4, 96), enc)
        assert sorted([tree.heads[0], tree.heads[1]]) in ([0, 1], [0, 2])

    @pytest.mark.parametrize("shape", [(2, 2), (1, 3), (3, 2, 1), (2, 2, 2, 2)])
    def test_output_is_always_a_sentfirst_tree(self, shape):
        doc = make_doc(list(shape))
        enc = BuiltinEncoder(dim=16, seed=5)
        allowed = set(enumerate_sentfirst_trees(DocumentShape(shape)))
        for seed in range(25):
            tree = SF.parse_document(doc, RandomScorer(seed, 96),
                                     RandomScorer(seed + 1000, 96), enc)
            assert validate_tree(doc, tree).ok
            assert tree.heads in allowed


class TestDecompose:
    def test_sentfirst_gold_fully_decomposes(self):
        doc = make_doc([2, 2])
        tree = DependencyTree((0, 1, 1, 3), ("ROOT", "a", "b", "c"))
        intra, inter = SF.decompose(doc, tree)
        assert [span for _, span, _ in intra] == [[1, 2], [3, 4]]
        assert inter == ([1, 3], {1: 0, 3: 1})

    def test_multi_outsider_sentence_skipped(self):
        # both EDUs of sentence 2 attach into sentence 1
        doc = make_doc([2, 2])
        tree = DependencyTree((0, 1, 1, 1), ("ROOT", "a", "b", "c"))
        intra, inter = SF.decompose(doc, tree)
        assert [span for _, span, _ in intra] == [[1, 2]]
        assert inter is None

    def test_sentence_roots(self):
        doc = make_doc([2, 2])
        tree = DependencyTree((0, 1, 1, 3), ("ROOT", "a", "b", "c"))
        assert SF.sentence_roots(doc, tree) == [1, 3]


def test_oracle_training_data_features_match_replay():
    doc = make_doc([2, 2])
    tree = DependencyTree((0, 1, 1, 3), ("ROOT", "a", "b", "c"))
    enc = BuiltinEncoder(dim=16, seed=0)
    data = SF.oracle_training_data([(doc, tree)], enc, "intra")
    # two 2-EDU sentences, two oracle actions each
    assert len(data) == 4
    actions = [a for _, a in data]
    assert actions == [T.Action.Shift.value, T.Action.RightArc.value] * 2
    inter_data = SF.oracle_training_data([(doc, tree)], enc, "inter")
    assert [a for _, a in inter_data] == [T.Action.Shift.value, T.Action.RightArc.value]


def test_document_oracles_cover_all_levels():
    doc = make_doc([2, 1])
    tree = DependencyTree((0, 1, 1), ("ROOT", "a", "b"))
    records = SF.document_oracles(doc, tree)
    sentences = [s for s, _ in records]
    assert sentences == [0, 1, None]
    assert records[-1][1] == ["Shift", "RightArc"]
