/**
 * Exporter command line.
 *
 *   export   --corpus c.ndjson --model dir --levels intra,inter,pair \
 *            --out e.ndjson [--max-len 512]
 *   finetune --corpus c.ndjson --model dir --out-model dir2 --out e.ndjson \
 *            [--lr 2e-5] [--epochs 1] [--batch 8] [--max-len 512] [--seed 42]
 *
 * finetune trains the pair-classification head (and encoder) on the gold
 * relations, saves the updated model, and re-exports the pair vectors.
 */

import { loadCorpus } from "./corpus.js";
import { LEVELS, Level, runExport } from "./export.js";
import { finetunePairClassifier } from "./finetune.js";
import { loadModel, saveModel } from "./model.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new UsageError(`bad flag pair near ${argv[i]}`);
    }
    flags.set(argv[i].slice(2), argv[i + 1]);
  }
  return flags;
}

class UsageError extends Error {}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new UsageError(`--${name} is required`);
  return value;
}

const warn = (message: string) => console.error(`warn: ${message}`);
const info = (message: string) => console.error(message);

async function cmdExport(flags: Map<string, string>): Promise<void> {
  const corpus = loadCorpus(need(flags, "corpus"));
  const encoder = loadModel(need(flags, "model"));
  const rawLevels = (flags.get("levels") ?? "intra,inter,pair").split(",");
  const levels = rawLevels.map((l) => l.trim()).filter(Boolean) as Level[];
  for (const level of levels) {
    if (!LEVELS.includes(level)) throw new UsageError(`unknown level ${level}`);
  }
  const maxLen = Number(flags.get("max-len") ?? 512);
  const count = await runExport(
    { corpus, encoder, levels, maxLen, warn }, need(flags, "out"));
  info(`event=export docs=${corpus.length} records=${count} dim=${encoder.hiddenSize}`);
}

async function cmdFinetune(flags: Map<string, string>): Promise<void> {
  const corpus = loadCorpus(need(flags, "corpus"));
  const encoder = loadModel(need(flags, "model"));
  const result = finetunePairClassifier(encoder, corpus, {
    learningRate: Number(flags.get("lr") ?? 2e-5),
    epochs: Number(flags.get("epochs") ?? 1),
    batchSize: Number(flags.get("batch") ?? 8),
    maxLen: Number(flags.get("max-len") ?? 512),
    seed: Number(flags.get("seed") ?? 42),
    log: info,
  });
  saveModel(encoder, need(flags, "out-model"));
  const count = await runExport(
    { corpus, encoder, levels: ["pair"], maxLen: Number(flags.get("max-len") ?? 512), warn },
    need(flags, "out"));
  info(`event=finetune labels=${result.labels.length} records=${count} `
       + `final_loss=${result.epochLosses.at(-1)?.toFixed(4) ?? "n/a"}`);
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    const flags = parseFlags(rest);
    if (command === "export") {
      await cmdExport(flags);
    } else if (command === "finetune") {
      await cmdFinetune(flags);
    } else {
      throw new UsageError(`unknown command ${command ?? "(none)"}; use export or finetune`);
    }
    return 0;
  } catch (error) {
    if (error instanceof UsageError) {
      console.error(`usage error: ${error.message}`);
      return 2;
    }
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
}

main().then((code) => process.exit(code));
