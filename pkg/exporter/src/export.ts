/**
 * The three export levels.
 *
 * intra: every EDU, encoded inside its full sentence, vector = mean of
 *        the final hidden states of the subword pieces whose character
 *        offsets fall in the EDU's range.
 * inter: every sentence root, encoded inside the pseudo sentence formed
 *        by all root texts joined with single spaces, averaged the same
 *        way. Roots come from the corpus heads (gold or predicted).
 * pair:  every (EDU, head) pair as a two-segment sequence in document
 *        order, vector = final hidden state of the aggregate [CLS]
 *        token; a root pair (e, 0) encodes the EDU with an empty second
 *        segment.
 *
 * Sequences longer than maxLen are truncated with a warning; an EDU whose
 * pieces are all cut away is an error.
 */

import { createWriteStream, WriteStream } from "node:fs";

import * as tf from "@tensorflow/tfjs";

import {
  Document, eduById, pairList, pseudoSentence, sentenceRoots, sentenceText,
} from "./corpus.js";
import { Encoder } from "./model.js";
import { EncodedSequence, encodeSequence, Piece } from "./tokenizer.js";

export const LEVELS = ["intra", "inter", "pair"] as const;
export type Level = (typeof LEVELS)[number];

export interface ExportJob {
  corpus: Document[];
  encoder: Encoder;
  levels: Level[];
  maxLen: number;
  warn?: (message: string) => void;
}

export interface EmbeddingRecord {
  doc_id: string;
  level: Level;
  edu: number | [number, number];
  vector: number[];
}

/** Mean of hidden rows whose piece offsets intersect [start, end). */
function poolRange(
  hidden: tf.Tensor2D,
  encoded: EncodedSequence,
  range: [number, number],
  what: string,
): number[] {
  const rows: number[] = [];
  encoded.pieces.forEach((piece, row) => {
    if (piece && piece.start < range[1] && piece.end > range[0]) rows.push(row);
  });
  if (rows.length === 0) {
    throw new Error(`${what}: all subword pieces were truncated away`);
  }
  return tf.tidy(() => {
    const selected = tf.gather(hidden, tf.tensor1d(rows, "int32"));
    return Array.from(selected.mean(0).dataSync());
  });
}

function clsVector(hidden: tf.Tensor2D): number[] {
  return tf.tidy(() => Array.from(hidden.slice([0, 0], [1, hidden.shape[1]]).dataSync()));
}

export function exportIntra(job: ExportJob, doc: Document): EmbeddingRecord[] {
  const records: EmbeddingRecord[] = [];
  const { encoder, maxLen } = job;
  doc.sentences.forEach((ids, sentenceIndex) => {
    const { text, ranges } = sentenceText(doc, sentenceIndex);
    const pieces = encoder.tokenizer.tokenize(text);
    const encoded = encodeSequence(encoder.tokenizer, pieces, null, maxLen);
    if (encoded.truncated) {
      job.warn?.(`${doc.docId}: sentence ${sentenceIndex} truncated to ${maxLen} tokens`);
    }
    const hidden = encoder.forward(encoded.ids, encoded.segments);
    for (const id of ids) {
      records.push({
        doc_id: doc.docId,
        level: "intra",
        edu: id,
        vector: poolRange(hidden, encoded, ranges.get(id)!, `${doc.docId} EDU ${id}`),
      });
    }
    hidden.dispose();
  });
  return records;
}

export function exportInter(job: ExportJob, doc: Document): EmbeddingRecord[] {
  const { encoder, maxLen } = job;
  const roots = sentenceRoots(doc);
  const { text, ranges } = pseudoSentence(doc, roots);
  const pieces = encoder.tokenizer.tokenize(text);
  const encoded = encodeSequence(encoder.tokenizer, pieces, null, maxLen);
  if (encoded.truncated) {
    job.warn?.(`${doc.docId}: root pseudo sentence truncated to ${maxLen} tokens`);
  }
  const hidden = encoder.forward(encoded.ids, encoded.segments);
  const records = roots.map((id) => ({
    doc_id: doc.docId,
    level: "inter" as const,
    edu: id,
    vector: poolRange(hidden, encoded, ranges.get(id)!, `${doc.docId} root EDU ${id}`),
  }));
  hidden.dispose();
  return records;
}

/** Hidden states of one ordered pair sequence (shared with fine-tuning). */
export function encodePair(
  encoder: Encoder,
  doc: Document,
  edu: number,
  head: number,
  maxLen: number,
  warn?: (message: string) => void,
): tf.Tensor2D {
  let first: Piece[];
  let second: Piece[] | null;
  if (head === 0) {
    first = encoder.tokenizer.tokenize(eduById(doc, edu).text);
    second = [];
  } else {
    if (head === edu) {
      warn?.(`${doc.docId}: degenerate pair (${edu}, ${edu})`);
    }
    const [a, b] = edu <= head ? [edu, head] : [head, edu];
    first = encoder.tokenizer.tokenize(eduById(doc, a).text);
    second = encoder.tokenizer.tokenize(eduById(doc, b).text);
  }
  const encoded = encodeSequence(encoder.tokenizer, first, second, maxLen);
  if (encoded.truncated) {
    warn?.(`${doc.docId}: pair (${edu}, ${head}) truncated to ${maxLen} tokens`);
  }
  return encoder.forward(encoded.ids, encoded.segments);
}

export function exportPairs(job: ExportJob, doc: Document): EmbeddingRecord[] {
  return pairList(doc).map(([edu, head]) => {
    const hidden = encodePair(job.encoder, doc, edu, head, job.maxLen, job.warn);
    const vector = clsVector(hidden);
    hidden.dispose();
    return { doc_id: doc.docId, level: "pair" as const, edu: [edu, head] as [number, number], vector };
  });
}

export async function runExport(job: ExportJob, outPath: string): Promise<number> {
  const positions = job.encoder.config.max_position_embeddings;
  if (job.maxLen > positions) {
    job.warn?.(`max-len ${job.maxLen} clamped to the model's ${positions} positions`);
    job = { ...job, maxLen: positions };
  }
  const stream = createWriteStream(outPath, { encoding: "utf-8" });
  let count = 0;
  const write = (record: EmbeddingRecord) => {
    stream.write(JSON.stringify(record) + "\n");
    count += 1;
  };
  stream.write(JSON.stringify({ dim: job.encoder.hiddenSize }) + "\n");
  for (const doc of job.corpus) {
    if (job.levels.includes("intra")) exportIntra(job, doc).forEach(write);
    if (job.levels.includes("inter")) exportInter(job, doc).forEach(write);
    if (job.levels.includes("pair")) exportPairs(job, doc).forEach(write);
  }
  await closeStream(stream);
  return count;
}

function closeStream(stream: WriteStream): Promise<void> {
  return new Promise((resolve, reject) => {
    stream.end(() => resolve());
    stream.on("error", reject);
  });
}
