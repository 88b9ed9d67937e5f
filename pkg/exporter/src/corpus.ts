/**
 * Corpus reading for the exporter.
 *
 * The input is ddparse's corpus NDJSON: one document per line with EDUs
 * carrying text, a 0-based sentence index, a head id (0 = document root)
 * and a relation label. Heads may be gold or predicted; the exporter only
 * needs them to locate sentence roots and to build the pair list.
 */

import { readFileSync } from "node:fs";

export interface Edu {
  id: number;
  text: string;
  sentence: number;
  head: number;
  relation: string;
}

export interface Document {
  docId: string;
  edus: Edu[];
  /** EDU ids per sentence, in order. */
  sentences: number[][];
}

export function loadCorpus(path: string): Document[] {
  const docs: Document[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, index) => {
    if (!line.trim()) return;
    let record: any;
    try {
      record = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${index + 1}: invalid JSON`);
    }
    if (typeof record.doc_id !== "string" || !Array.isArray(record.edus)) {
      throw new Error(`${path}:${index + 1}: record needs doc_id and edus`);
    }
    const edus: Edu[] = record.edus.map((raw: any, pos: number) => {
      if (raw.id !== pos + 1) {
        throw new Error(`${path}:${index + 1}: EDU ids must be consecutive from 1`);
      }
      return {
        id: raw.id,
        text: String(raw.text),
        sentence: Number(raw.sentence),
        head: Number(raw.head),
        relation: String(raw.relation ?? ""),
      };
    });
    const sentences: number[][] = [];
    for (const edu of edus) {
      if (edu.sentence === sentences.length) sentences.push([]);
      if (edu.sentence !== sentences.length - 1) {
        throw new Error(`${path}:${index + 1}: sentence indices must be contiguous`);
      }
      sentences[sentences.length - 1].push(edu.id);
    }
    docs.push({ docId: record.doc_id, edus, sentences });
  });
  return docs;
}

export function eduById(doc: Document, id: number): Edu {
  return doc.edus[id - 1];
}

/** EDUs whose head falls outside their own sentence, in document order. */
export function sentenceRoots(doc: Document): number[] {
  const roots: number[] = [];
  for (const ids of doc.sentences) {
    const inSentence = new Set(ids);
    for (const id of ids) {
      const head = eduById(doc, id).head;
      if (head === 0 || !inSentence.has(head)) roots.push(id);
    }
  }
  return roots;
}

/** Every (edu, head) pair of the document's tree; the root pairs with 0. */
export function pairList(doc: Document): Array<[number, number]> {
  return doc.edus.map((edu) => [edu.id, edu.head]);
}

/**
 * One sentence as a single string (EDU texts joined by a space), with the
 * character range each EDU occupies. The ranges drive subword alignment.
 */
export function sentenceText(
  doc: Document,
  sentenceIndex: number,
): { text: string; ranges: Map<number, [number, number]> } {
  return joinWithRanges(doc.sentences[sentenceIndex].map((id) => [id, eduById(doc, id).text]));
}

/** The pseudo sentence: all sentence-root texts joined by a single space. */
export function pseudoSentence(
  doc: Document,
  roots: number[],
): { text: string; ranges: Map<number, [number, number]> } {
  return joinWithRanges(roots.map((id) => [id, eduById(doc, id).text]));
}

function joinWithRanges(
  parts: Array<[number, string]>,
): { text: string; ranges: Map<number, [number, number]> } {
  const ranges = new Map<number, [number, number]>();
  let text = "";
  for (const [id, part] of parts) {
    if (text.length > 0) text += " ";
    ranges.set(id, [text.length, text.length + part.length]);
    text += part;
  }
  return { text, ranges };
}
