import math

import numpy as np
import pytest

from ddparse import neural as N
from ddparse import relation as R
from ddparse.corpus import DependencyTree, Document, Edu, RelationSet
from ddparse.encoder import BuiltinEncoder, EmbeddingError


def make_doc(sentence_lengths, doc_id="d"):
    edus, spans, next_id = [], [], 1
    for s, length in enumerate(sentence_lengths):
        first = next_id
        for _ in range(length):
            edus.append(Edu(next_id, f"tok{next_id} fill", (f"tok{next_id}", "fill"), s))
            next_id += 1
        spans.append((first, next_id - 1))
    return Document(doc_id, tuple(edus), tuple(spans))


class TestPositionEmbedding:
    @pytest.mark.parametrize("dim", [1, 4, 64])
    def test_origin_is_all_ones(self, dim):
        np.testing.assert_allclose(R.position_embedding(0, 0, dim), np.ones(dim))

    def test_sentence_position_component(self):
        pe = R.position_embedding(1, 0, 4)
        assert pe[0] == pytest.approx(math.sin(1) + 1.0)
        assert pe[0] == pytest.approx(1.84147, abs=1e-5)

    def test_in_sentence_position_component(self):
        pe = R.position_embedding(0, 1, 4)
        assert pe[0] == pytest.approx(math.cos(1))
        assert pe[0] == pytest.approx(0.54030, abs=1e-5)

    def test_components_follow_formula(self):
        dim = 8
        pe = R.position_embedding(3, 5, dim)
        for j in range(dim):
            freq = 10000.0 ** (j / dim)
            assert pe[j] == pytest.approx(math.sin(3 / freq) + math.cos(5 / freq))

    def test_bounded_by_two(self):
        for no in range(0, 51, 5):
            for pos in range(0, 51, 5):
                for dim in (4, 64):
                    assert np.max(np.abs(R.position_embedding(no, pos, dim))) <= 2.0

    def test_negative_arguments_rejected(self):
        with pytest.raises(ValueError):
            R.position_embedding(-1, 0, 4)


class TestPairSequence:
    def test_two_edu_document(self):
        doc = make_doc([2])
        tree = DependencyTree((0, 1), ("ROOT", "elab"))
        vectors = {(1, 0): np.zeros(4), (2, 1): np.ones(4)}
        seq = R.build_pair_sequence(doc, tree, vectors)
        assert [(p.e_id, p.h_id) for p in seq] == [(1, 0), (2, 1)]
        assert seq[1].ordered == (1, 2)

    def test_head_direction_normalizes_to_document_order(self):
        doc = make_doc([2])
        backward = DependencyTree((2, 0), ("elab", "ROOT"))
        vectors = {(1, 2): np.zeros(4), (2, 0): np.zeros(4)}
        seq = R.build_pair_sequence(doc, backward, vectors)
        assert seq[0].ordered == (1, 2)

    def test_first_edu_pe_is_all_ones(self):
        doc = make_doc([2])
        tree = DependencyTree((0, 1), ("ROOT", "elab"))
        vectors = {(1, 0): np.full(4, 2.0), (2, 1): np.zeros(4)}
        seq = R.build_pair_sequence(doc, tree, vectors)
        np.testing.assert_allclose(seq[0].pe, np.ones(4))
        np.testing.assert_allclose(seq[0].combined, np.full(4, 3.0))

    def test_combined_adds_elementwise(self):
        doc = make_doc([1, 1])
        tree = DependencyTree((0, 1), ("ROOT", "elab"))
        vectors = {(1, 0): np.zeros(4), (2, 1): np.zeros(4)}
        seq = R.build_pair_sequence(doc, tree, vectors)
        np.testing.assert_allclose(seq[1].combined, R.position_embedding(1, 0, 4))

    def test_missing_pair_is_error(self):
        doc = make_doc([2])
        tree = DependencyTree((0, 1), ("ROOT", "elab"))
        with pytest.raises(EmbeddingError, match=r"\(2, 1\)"):
            R.build_pair_sequence(doc, tree, {(1, 0): np.zeros(4)})


class TestClassifyDirect:
    def test_zero_model_breaks_ties_low(self):
        model = N.FeedForward(4, 4, 3, seed=0, labels=("ROOT", "a", "b"))
        for k in model.params:
            model.params[k][:] = 0.0
        assert R.classify_direct(model, np.ones(4)) == "ROOT"

    def test_deterministic(self):
        model = N.FeedForward(4, 4, 3, seed=1, labels=("ROOT", "a", "b"))
        x = np.array([0.4, -0.2, 1.0, 0.0])
        assert R.classify_direct(model, x) == R.classify_direct(model, x)

    def test_sign_pattern_task_trains_to_perfection(self):
        # relation fully determined by which half of the vector is active
        rng = np.random.default_rng(6)
        labels = ("ROOT", "pos", "neg")
        relations = RelationSet(labels)
        data = []
        for _ in range(60):
            label = int(rng.integers(1, 3))
            x = rng.normal(scale=0.05, size=8)
            x[:4] += 1.5 if label == 1 else -1.5
            data.append((x, label))
        model = N.FeedForward(8, 16, len(relations), seed=7, labels=labels)
        N.train(model, data, N.TrainConfig(learning_rate=0.02, epochs=120, seed=8))
        assert all(R.classify_direct(model, x) == labels[y] for x, y in data)


def _tiny_gold_corpus():
    doc = make_doc([2, 2])
    tree = DependencyTree((0, 1, 1, 3), ("ROOT", "elab", "joint", "attr"))
    return doc, tree


class TestLabelRelations:
    def _trained_taggers(self, doc, tree, enc):
        relations = RelationSet.from_corpus([(doc, tree)])
        config = N.TrainConfig(learning_rate=0.02, epochs=150, seed=1)
        intra_data = R.tagger_training_data([(doc, tree)], enc, relations, "intra")
        inter_data = R.tagger_training_data([(doc, tree)], enc, relations, "inter")
        intra = N.BiLstmTagger(enc.dim, 16, len(relations), seed=2,
                               labels=relations.labels)
        inter = N.BiLstmTagger(enc.dim, 16, len(relations), seed=3,
                               labels=relations.labels)
        N.train(intra, intra_data, config)
        N.train(inter, inter_data, config)
        return intra, inter

    def test_overfit_recovers_gold_relations(self):
        doc, tree = _tiny_gold_corpus()
        enc = BuiltinEncoder(dim=16, seed=4)
        intra, inter = self._trained_taggers(doc, tree, enc)
        assert R.label_relations(doc, tree, intra, inter, enc) == tree.relations

    def test_root_always_forced_to_root_label(self):
        doc, tree = _tiny_gold_corpus()
        enc = BuiltinEncoder(dim=16, seed=4)
        relations = RelationSet.from_corpus([(doc, tree)])
        untrained_a = N.BiLstmTagger(enc.dim, 8, len(relations), seed=5,
                                     labels=relations.labels)
        untrained_b = N.BiLstmTagger(enc.dim, 8, len(relations), seed=6,
                                     labels=relations.labels)
        labels = R.label_relations(doc, tree, untrained_a, untrained_b, enc)
        assert labels[tree.root - 1] == "ROOT"

    def test_layer_two_touches_only_sentence_roots(self):
        doc, tree = _tiny_gold_corpus()
        enc = BuiltinEncoder(dim=16, seed=4)
        relations = RelationSet.from_corpus([(doc, tree)])
        intra = N.BiLstmTagger(enc.dim, 8, len(relations), seed=7,
                               labels=relations.labels)
        inter_a = N.BiLstmTagger(enc.dim, 8, len(relations), seed=8,
                                 labels=relations.labels)
        inter_b = N.BiLstmTagger(enc.dim, 8, len(relations), seed=9,
                                 labels=relations.labels)
        with_a = R.label_relations(doc, tree, intra, inter_a, enc)
        with_b = R.label_relations(doc, tree, intra, inter_b, enc)
        roots = {1, 3}
        for i in range(1, len(doc) + 1):
            if i not in roots:
                assert with_a[i - 1] == with_b[i - 1]

    def test_single_sentence_layer_two_sequence(self):
        doc = make_doc([2])
        tree = DependencyTree((0, 1), ("ROOT", "elab"))
        enc = BuiltinEncoder(dim=16, seed=10)
        relations = RelationSet(("ROOT", "elab"))
        intra = N.BiLstmTagger(enc.dim, 8, 2, seed=11, labels=relations.labels)
        inter = N.BiLstmTagger(enc.dim, 8, 2, seed=12, labels=relations.labels)
        labels = R.label_relations(doc, tree, intra, inter, enc)
        assert labels[0] == "ROOT"
        assert labels[1] in relations.labels


def test_tagger_training_data_shapes():
    doc, tree = _tiny_gold_corpus()
    enc = BuiltinEncoder(dim=16, seed=0)
    relations = RelationSet.from_corpus([(doc, tree)])
    (xs, ys), = R.tagger_training_data([(doc, tree)], enc, relations, "intra")
    assert xs.shape == (4, 16) and list(ys.shape) == [4]
    (xs_i, ys_i), = R.tagger_training_data([(doc, tree)], enc, relations, "inter")
    assert xs_i.shape == (2, 16)
    assert [relations.labels[y] for y in ys_i] == ["ROOT", "joint"]
