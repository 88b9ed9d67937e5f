/**
 * Writes the bundled tiny test model (testdata/tiny-model).
 *
 * The character-level word-piece vocabulary segments any ASCII text with
 * no [UNK], so offset alignment is exact in tests. Weights are seeded
 * normal(0, 0.02) draws; regenerating with the same seed is byte-stable.
 *
 * Usage: npx tsx scripts/gen-test-model.ts [outDir] [seed]
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

const outDir = process.argv[2] ?? "testdata/tiny-model";
const seed = Number(process.argv[3] ?? 20240042);

const config = {
  hidden_size: 32,
  num_layers: 2,
  num_heads: 4,
  intermediate_size: 64,
  max_position_embeddings: 128,
  layer_norm_eps: 1e-12,
};

const chars = "abcdefghijklmnopqrstuvwxyz0123456789.,;:!?'\"()-=_/";
const pieces = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"];
for (const c of chars) pieces.push(c);
for (const c of chars) pieces.push("##" + c);
// a few frequent whole words keep test sequences short
for (const word of ["the", "of", "to", "and", "show", "tests", "##ing", "##ion"]) {
  if (!pieces.includes(word)) pieces.push(word);
}

function mulberry32(s: number): () => number {
  let state = s >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const uniform = mulberry32(seed);
function normal(): number {
  const u = Math.max(uniform(), 1e-12);
  const v = uniform();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
}

const weights: Record<string, { shape: number[]; values: number[] }> = {};

function draw(name: string, shape: number[], scale = 0.02): void {
  const size = shape.reduce((a, b) => a * b, 1);
  const values = Array.from({ length: size },
                            () => Number((normal() * scale).toFixed(6)));
  weights[name] = { shape, values };
}

function constant(name: string, shape: number[], value: number): void {
  const size = shape.reduce((a, b) => a * b, 1);
  weights[name] = { shape, values: Array(size).fill(value) };
}

const h = config.hidden_size;
const f = config.intermediate_size;

draw("embeddings.token", [pieces.length, h]);
draw("embeddings.position", [config.max_position_embeddings, h]);
draw("embeddings.segment", [2, h]);
constant("embeddings.ln.gamma", [h], 1);
constant("embeddings.ln.beta", [h], 0);

for (let layer = 0; layer < config.num_layers; layer++) {
  const p = `layer${layer}`;
  for (const name of ["wq", "wk", "wv", "wo"]) draw(`${p}.attn.${name}`, [h, h]);
  for (const name of ["bq", "bk", "bv", "bo"]) constant(`${p}.attn.${name}`, [h], 0);
  constant(`${p}.ln1.gamma`, [h], 1);
  constant(`${p}.ln1.beta`, [h], 0);
  draw(`${p}.ffn.w1`, [h, f]);
  constant(`${p}.ffn.b1`, [f], 0);
  draw(`${p}.ffn.w2`, [f, h]);
  constant(`${p}.ffn.b2`, [h], 0);
  constant(`${p}.ln2.gamma`, [h], 1);
  constant(`${p}.ln2.beta`, [h], 0);
}

mkdirSync(outDir, { recursive: true });
writeFileSync(join(outDir, "config.json"), JSON.stringify(config, null, 2));
writeFileSync(join(outDir, "vocab.json"), JSON.stringify({ pieces }, null, 2));
writeFileSync(join(outDir, "weights.json"), JSON.stringify(weights));
console.error(`wrote ${outDir}: ${pieces.length} pieces, hidden ${h}`);
