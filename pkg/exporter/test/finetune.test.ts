import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { loadCorpus } from "../src/corpus.js";
import { runExport } from "../src/export.js";
import { finetunePairClassifier, labelInventory } from "../src/finetune.js";
import { loadModel, saveModel } from "../src/model.js";

const MODEL_DIR = "testdata/tiny-model";
const SAMPLE = "testdata/sample.ndjson";

const options = (overrides = {}) => ({
  learningRate: 4e-5,
  epochs: 2,
  batchSize: 8,
  maxLen: 128,
  seed: 42,
  ...overrides,
});

describe("pair classifier fine-tuning", () => {
  it("restricts learning rates to the supported grid", () => {
    const encoder = loadModel(MODEL_DIR);
    expect(() => finetunePairClassifier(encoder, loadCorpus(SAMPLE),
                                        options({ learningRate: 0.01 })))
      .toThrow(/learning rate/);
  });

  it("puts ROOT first in the label inventory", () => {
    const labels = labelInventory(loadCorpus(SAMPLE));
    expect(labels[0]).toBe("ROOT");
    expect([...labels.slice(1)].sort()).toEqual(labels.slice(1));
  });

  it("zero epochs leaves the export byte-identical", async () => {
    const dir = mkdtempSync(join(tmpdir(), "ft-"));
    const corpus = loadCorpus(SAMPLE);

    const pretrained = loadModel(MODEL_DIR);
    await runExport({ corpus, encoder: pretrained, levels: ["pair"], maxLen: 128 },
                    join(dir, "before.ndjson"));

    const tuned = loadModel(MODEL_DIR);
    const result = finetunePairClassifier(tuned, corpus, options({ epochs: 0 }));
    expect(result.epochLosses).toEqual([]);
    await runExport({ corpus, encoder: tuned, levels: ["pair"], maxLen: 128 },
                    join(dir, "after.ndjson"));

    expect(readFileSync(join(dir, "after.ndjson"), "utf-8"))
      .toBe(readFileSync(join(dir, "before.ndjson"), "utf-8"));
  });

  it("training loss decreases epoch over epoch", () => {
    const encoder = loadModel(MODEL_DIR);
    const result = finetunePairClassifier(encoder, loadCorpus(SAMPLE),
                                          options({ epochs: 3 }));
    expect(result.epochLosses).toHaveLength(3);
    expect(result.epochLosses[1]).toBeLessThan(result.epochLosses[0]);
    expect(result.epochLosses[2]).toBeLessThan(result.epochLosses[1]);
  });

  it("fine-tuning changes the exported pair vectors", async () => {
    const dir = mkdtempSync(join(tmpdir(), "ft-"));
    const corpus = loadCorpus(SAMPLE);

    const pretrained = loadModel(MODEL_DIR);
    await runExport({ corpus, encoder: pretrained, levels: ["pair"], maxLen: 128 },
                    join(dir, "before.ndjson"));
    const tuned = loadModel(MODEL_DIR);
    finetunePairClassifier(tuned, corpus, options({ epochs: 1 }));
    await runExport({ corpus, encoder: tuned, levels: ["pair"], maxLen: 128 },
                    join(dir, "after.ndjson"));

    expect(readFileSync(join(dir, "after.ndjson"), "utf-8"))
      .not.toBe(readFileSync(join(dir, "before.ndjson"), "utf-8"));
  });

  it("saved fine-tuned models reload with their labels", () => {
    const dir = join(mkdtempSync(join(tmpdir(), "ft-")), "model");
    const encoder = loadModel(MODEL_DIR);
    const result = finetunePairClassifier(encoder, loadCorpus(SAMPLE),
                                          options({ epochs: 1 }));
    saveModel(encoder, dir);
    const reloaded = loadModel(dir);
    expect(reloaded.labels).toEqual(result.labels);
    expect(reloaded.hasClassifier()).toBe(true);
    const ids = [reloaded.tokenizer.clsId, reloaded.tokenizer.sepId];
    const hidden = reloaded.forward(ids, [0, 0]);
    const logits = reloaded.classifyLogits(hidden);
    expect(logits.shape).toEqual([result.labels.length]);
  });
});
