import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { loadCorpus, pseudoSentence, sentenceRoots } from "../src/corpus.js";
import { ExportJob, Level, exportInter, exportIntra, exportPairs, runExport } from "../src/export.js";
import { loadModel } from "../src/model.js";

const MODEL_DIR = "testdata/tiny-model";
const SAMPLE = "testdata/sample.ndjson";

function job(levels: Level[] = ["intra", "inter", "pair"], maxLen = 128): ExportJob {
  return {
    corpus: loadCorpus(SAMPLE),
    encoder: loadModel(MODEL_DIR),
    levels,
    maxLen,
    warn: () => {},
  };
}

describe("corpus reading", () => {
  it("derives sentence groups and roots from heads", () => {
    const docs = loadCorpus(SAMPLE);
    expect(docs).toHaveLength(3);
    for (const doc of docs) {
      const roots = sentenceRoots(doc);
      expect(roots).toHaveLength(doc.sentences.length);
    }
  });

  it("joins root texts with single spaces in document order", () => {
    const doc = loadCorpus(SAMPLE)[0];
    const roots = sentenceRoots(doc);
    const { text, ranges } = pseudoSentence(doc, roots);
    expect(text).toBe(roots.map((r) => doc.edus[r - 1].text).join(" "));
    for (const root of roots) {
      const [start, end] = ranges.get(root)!;
      expect(text.slice(start, end)).toBe(doc.edus[root - 1].text);
    }
  });
});

describe("export levels", () => {
  it("emits one intra record per EDU", () => {
    const j = job();
    for (const doc of j.corpus) {
      const records = exportIntra(j, doc);
      expect(records).toHaveLength(doc.edus.length);
      expect(new Set(records.map((r) => r.edu))).toEqual(
        new Set(doc.edus.map((e) => e.id)));
    }
  });

  it("emits one inter record per sentence root", () => {
    const j = job();
    const doc = j.corpus[0];
    const records = exportInter(j, doc);
    expect(records.map((r) => r.edu)).toEqual(sentenceRoots(doc));
  });

  it("emits one pair record per EDU with [edu, head] keys", () => {
    const j = job();
    const doc = j.corpus[0];
    const records = exportPairs(j, doc);
    expect(records).toHaveLength(doc.edus.length);
    for (const record of records) {
      const [edu, head] = record.edu as [number, number];
      expect(doc.edus[edu - 1].head).toBe(head);
    }
  });

  it("vectors always match the model hidden size", () => {
    const j = job();
    const doc = j.corpus[1];
    for (const record of [...exportIntra(j, doc), ...exportInter(j, doc),
                          ...exportPairs(j, doc)]) {
      expect(record.vector).toHaveLength(j.encoder.hiddenSize);
      expect(record.vector.every(Number.isFinite)).toBe(true);
    }
  });

  it("is deterministic across independent model loads", () => {
    const a = exportIntra(job(), job().corpus[0]);
    const b = exportIntra(job(), job().corpus[0]);
    expect(a).toEqual(b);
  });

  it("changing a root's text changes inter vectors of other roots", () => {
    const j = job();
    const doc = j.corpus[0];
    const roots = sentenceRoots(doc);
    expect(roots.length).toBeGreaterThan(1);
    const before = exportInter(j, doc);
    doc.edus[roots[0] - 1].text = "w9 w9 w9 w9 w9 w9";
    const after = exportInter(j, doc);
    const other = roots[1];
    const pick = (records: typeof before) =>
      records.find((r) => r.edu === other)!.vector;
    expect(pick(after)).not.toEqual(pick(before));
  });

  it("warns on truncation and errors when an EDU is cut away entirely", () => {
    const warnings: string[] = [];
    const j = job(["intra"], 8);
    j.warn = (m) => warnings.push(m);
    const doc = j.corpus.find((d) => d.sentences.some((s) => s.length >= 3))!;
    expect(() => exportIntra(j, doc)).toThrow(/truncated/);
    expect(warnings.length).toBeGreaterThan(0);
  });
});

describe("file output", () => {
  it("writes a header and schema-conformant records", async () => {
    const out = join(mkdtempSync(join(tmpdir(), "exp-")), "e.ndjson");
    const j = job();
    const count = await runExport(j, out);
    const lines = readFileSync(out, "utf-8").trim().split("\n");
    expect(lines).toHaveLength(count + 1);
    const header = JSON.parse(lines[0]);
    expect(header).toEqual({ dim: j.encoder.hiddenSize });
    const seen = new Set<string>();
    for (const line of lines.slice(1)) {
      const record = JSON.parse(line);
      expect(["intra", "inter", "pair"]).toContain(record.level);
      expect(typeof record.doc_id).toBe("string");
      expect(record.vector).toHaveLength(header.dim);
      const key = `${record.doc_id}|${record.level}|${JSON.stringify(record.edu)}`;
      expect(seen.has(key)).toBe(false);
      seen.add(key);
    }
  });
});
