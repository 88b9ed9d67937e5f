"""Acceptance suite: one test per release criterion, one printed verdict each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
Every tolerance is pinned here; a red criterion is a release blocker.
"""

import json
import time

import numpy as np
import pytest

from ddparse import bounds as B
from ddparse import neural as N
from ddparse import transition as T
from ddparse.cli import run
from ddparse.corpus import DependencyTree, validate_tree
from ddparse.evaluation import evaluate_corpus
from ddparse.relation import position_embedding
from ddparse.toy import make_toy_corpus


def verdict(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {name}: {status} {detail}".rstrip())
    assert ok, f"{name}: {detail}"


def test_oracle_roundtrip_exhaustive():
    """Every projective tree over 1-5 EDUs is reconstructed exactly from
    its static-oracle action sequence.  Budget: 5 s."""
    start = time.monotonic()
    total = 0
    for l in range(1, 6):
        span = list(range(1, l + 1))
        for heads in B.enumerate_projective_trees(l):
            gold = {i: heads[i - 1] for i in span}
            actions = T.oracle_actions(span, gold)
            final = T.replay(span, actions)
            rebuilt = {d: h for h, d in final.arcs}
            assert rebuilt == {i: h for i, h in gold.items() if h != 0}, heads
            total += 1
    elapsed = time.monotonic() - start
    verdict("oracle-roundtrip", total == 1 + 2 + 7 + 30 + 143 and elapsed < 5.0,
            f"trees={total} elapsed={elapsed:.2f}s")


def test_decode_wellformedness():
    """1000 random score functions x span lengths 1-6: decode always yields
    a valid projective single-rooted tree."""
    failures = 0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        for length in range(1, 7):
            span = list(range(1, length + 1))
            heads = T.decode(span, lambda s: rng.random(4))
            array = tuple(heads[i] for i in span)
            report = validate_tree(length, DependencyTree(array, ("ROOT",) * length))
            if not report.ok:
                failures += 1
    verdict("decode-wellformedness", failures == 0,
            f"failures={failures}/6000")


def test_theorem1_sweep():
    """|T'| <= 2/(n+1) |T| on every shape with at most 7 EDUs (exact
    integers), with the documented counts for shape [2,2].  Budget: 30 s."""
    start = time.monotonic()
    reports = B.sweep(1, 7)
    violations = [r for r in reports if not r.holds]
    spot = B.check_theorem1(B.DocumentShape((2, 2)))
    elapsed = time.monotonic() - start
    ok = (not violations and spot.t_count == 30 and spot.tprime_count == 8
          and spot.bound == 20.0 and elapsed < 30.0)
    verdict("theorem1-sweep", ok,
            f"shapes={len(reports)} violations={len(violations)} "
            f"[2,2]=({spot.t_count},{spot.tprime_count},{spot.bound}) "
            f"elapsed={elapsed:.2f}s")


def test_theorem2_sweep():
    """|T'| <= (1/2)^n |T| on every shape with at most 10 leaves and m >= 2,
    with the documented counts for shape [2,2]."""
    reports = B.sweep(2, 10)
    violations = [r for r in reports if not r.holds]
    spot = B.check_theorem2(B.DocumentShape((2, 2)))
    ok = not violations and spot.t_count == 5 and spot.tprime_count == 1
    verdict("theorem2-sweep", ok,
            f"shapes={len(reports)} violations={len(violations)} "
            f"[2,2]=({spot.t_count},{spot.tprime_count})")


def test_filter_construct_agreement():
    """Product-constructed Sent-First trees equal the property-filtered
    subset of all projective trees, as sets, for every shape up to 6 EDUs."""
    mismatches = []
    shapes = [s for s in B.all_shapes(6)]
    for shape in shapes:
        built = set(B.enumerate_sentfirst_trees(shape))
        filtered = {
            heads for heads in B.enumerate_projective_trees(shape.total)
            if B.has_sentfirst_property(heads, shape)
        }
        if built != filtered:
            mismatches.append(shape.sentence_lengths)
    verdict("filter-construct-agreement", not mismatches,
            f"shapes={len(shapes)} mismatches={mismatches}")


def _smooth_ff_instance(seed):
    """Feed-forward instance whose check is well posed: central differences
    are only meaningful away from ReLU kinks, so instances with a hidden
    pre-activation within 0.01 of zero are skipped (deterministically)."""
    while True:
        rng = np.random.default_rng(1000 + seed)
        ff = N.FeedForward(4, 8, 4, seed=seed)
        data = [(rng.normal(size=4), int(rng.integers(4))) for _ in range(5)]
        xs = np.stack([x for x, _ in data])
        z1 = xs @ ff.params["W1"] + ff.params["b1"]
        if np.abs(z1).min() > 0.01:
            return ff, data
        seed += 10000


def test_gradient_checks():
    """Analytic gradients match central finite differences within 1e-3
    relative error on 20 random small instances per architecture."""
    worst = 0.0
    for seed in range(20):
        ff, data = _smooth_ff_instance(seed)
        report = N.grad_check(ff, lambda m: m.batch_loss_and_grads(data),
                              tolerance=1e-3)
        worst = max(worst, report.max_rel_error)
        assert report.passed, f"feed-forward seed {seed}: {report}"

        rng = np.random.default_rng(2000 + seed)
        tagger = N.BiLstmTagger(3, 4, 4, seed=seed)
        seqs = [(rng.normal(size=(3, 3)), rng.integers(4, size=3)) for _ in range(2)]
        report = N.grad_check(tagger, lambda m: m.batch_loss_and_grads(seqs),
                              tolerance=1e-3)
        worst = max(worst, report.max_rel_error)
        assert report.passed, f"tagger seed {seed}: {report}"
    verdict("gradient-checks", worst < 1e-3, f"worst_rel_error={worst:.2e}")


def test_overfit_pipeline(tmp_path):
    """Full CLI pipeline on the bundled toy corpus with the built-in
    encoder: train intra/inter tree models and both relation layers, then
    parse + label + eval on the training set.  UAS must reach 1.0 and
    LAS(pred) at least 0.95 within 300 epochs and 5 minutes."""
    start = time.monotonic()
    corpus = tmp_path / "toy.ndjson"
    assert run(["make-toy-corpus", "--out", str(corpus), "--seed", "42"]) == 0

    models = {name: tmp_path / f"{name}.bin"
              for name in ("intra", "inter", "tag_intra", "tag_inter")}
    for level in ("intra", "inter"):
        assert run(["train", "--corpus", str(corpus), "--task", "tree",
                    "--level", level, "--model", str(models[level]),
                    "--lr", "0.005", "--epochs", "60", "--seed", "42"]) == 0
    for level in ("intra", "inter"):
        assert run(["train", "--corpus", str(corpus), "--task", "relation",
                    "--level", level, "--model", str(models[f"tag_{level}"]),
                    "--lr", "0.01", "--epochs", "150", "--hidden", "96",
                    "--seed", "42"]) == 0

    pred = tmp_path / "pred.ndjson"
    labeled = tmp_path / "labeled.ndjson"
    report_path = tmp_path / "report.json"
    assert run(["parse", "--corpus", str(corpus), "--model", str(models["intra"]),
                "--model", str(models["inter"]), "--out", str(pred)]) == 0
    assert run(["label", "--corpus", str(pred), "--model", str(models["tag_intra"]),
                "--model", str(models["tag_inter"]), "--out", str(labeled)]) == 0
    assert run(["eval", "--corpus", str(corpus), "--pred", str(labeled),
                "--out", str(report_path)]) == 0

    report = json.loads(report_path.read_text())
    elapsed = time.monotonic() - start
    ok = report["uas"] == 1.0 and report["las_pred"] >= 0.95 and elapsed < 300.0
    verdict("overfit-pipeline", ok,
            f"uas={report['uas']:.4f} las_pred={report['las_pred']:.4f} "
            f"elapsed={elapsed:.1f}s")


def test_metric_identities():
    """On randomized gold/pred pairs: las_pred <= uas, the intra/inter
    breakdown recombines to the overall UAS exactly, and per-relation
    supports sum to the node count."""
    rng = np.random.default_rng(99)
    base = make_toy_corpus(seed=17)
    labels = ["elab-addition", "joint", "attribution", "contrast"]
    checked = 0
    for _ in range(150):
        doc, gold = base[int(rng.integers(len(base)))]
        choices = B.enumerate_sentfirst_trees(
            B.DocumentShape(tuple(b - a + 1 for a, b in doc.sentence_spans))
        ) if len(doc) <= 9 else None
        if choices is None:
            continue
        heads = choices[int(rng.integers(len(choices)))]
        relations = tuple("ROOT" if h == 0 else labels[int(rng.integers(4))]
                          for h in heads)
        pred = DependencyTree(heads, relations)
        metrics = evaluate_corpus([(doc, gold)], [(doc, pred)])
        assert metrics.las_pred <= metrics.uas
        intra_hits = round(metrics.intra_uas * metrics.intra_count)
        inter_hits = round(metrics.inter_uas * metrics.inter_count)
        assert intra_hits + inter_hits == round(metrics.uas * metrics.node_count)
        assert metrics.intra_count + metrics.inter_count == metrics.node_count
        supports = sum(s.support for s in metrics.per_relation_f1.values())
        assert supports == metrics.node_count
        checked += 1
    verdict("metric-identities", checked >= 100, f"pairs={checked}")


def test_position_embedding_formula():
    """PE(0,0,d) is all ones for d in {1,4,64}; |PE_j| <= 2 over the full
    grid No, ID in [0,50] for d in {4,64}."""
    for dim in (1, 4, 64):
        np.testing.assert_array_equal(position_embedding(0, 0, dim), np.ones(dim))
    peak = 0.0
    for dim in (4, 64):
        for no in range(51):
            for pos in range(51):
                peak = max(peak, float(np.abs(position_embedding(no, pos, dim)).max()))
    verdict("position-embedding", peak <= 2.0, f"max_component={peak:.4f}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
