/**
 * Offset-tracking subword tokenizer.
 *
 * Greedy longest-match word pieces: a word is split into an initial piece
 * plus "##"-prefixed continuations; a word with no full segmentation
 * becomes a single [UNK] piece. Matching is case-insensitive, offsets are
 * character positions in the original string, so downstream code can pool
 * hidden states over any character range (an EDU inside its sentence).
 */

export const PAD = "[PAD]";
export const UNK = "[UNK]";
export const CLS = "[CLS]";
export const SEP = "[SEP]";

export interface Piece {
  id: number;
  /** character range [start, end) in the source string; null for specials */
  start: number;
  end: number;
}

export class Tokenizer {
  readonly pieces: string[];
  private readonly index: Map<string, number>;
  readonly padId: number;
  readonly unkId: number;
  readonly clsId: number;
  readonly sepId: number;

  constructor(pieces: string[]) {
    this.pieces = pieces;
    this.index = new Map(pieces.map((p, i) => [p, i]));
    for (const special of [PAD, UNK, CLS, SEP]) {
      if (!this.index.has(special)) throw new Error(`vocabulary lacks ${special}`);
    }
    this.padId = this.index.get(PAD)!;
    this.unkId = this.index.get(UNK)!;
    this.clsId = this.index.get(CLS)!;
    this.sepId = this.index.get(SEP)!;
  }

  get size(): number {
    return this.pieces.length;
  }

  /** Subword pieces of a text, with character offsets. */
  tokenize(text: string): Piece[] {
    const out: Piece[] = [];
    const wordPattern = /\S+/g;
    for (let match = wordPattern.exec(text); match; match = wordPattern.exec(text)) {
      const word = match[0];
      const offset = match.index;
      const segmented = this.segmentWord(word, offset);
      if (segmented) {
        out.push(...segmented);
      } else {
        out.push({ id: this.unkId, start: offset, end: offset + word.length });
      }
    }
    return out;
  }

  private segmentWord(word: string, offset: number): Piece[] | null {
    const lower = word.toLowerCase();
    if (lower.length !== word.length) return null; // exotic case mapping: bail to [UNK]
    const pieces: Piece[] = [];
    let pos = 0;
    while (pos < lower.length) {
      let found = -1;
      let foundLen = 0;
      for (let len = lower.length - pos; len >= 1; len--) {
        const candidate = (pos === 0 ? "" : "##") + lower.slice(pos, pos + len);
        const id = this.index.get(candidate);
        if (id !== undefined) {
          found = id;
          foundLen = len;
          break;
        }
      }
      if (found < 0) return null;
      pieces.push({ id: found, start: offset + pos, end: offset + pos + foundLen });
      pos += foundLen;
    }
    return pieces;
  }
}

export interface EncodedSequence {
  ids: number[];
  segments: number[];
  /** aligned with ids; null marks special tokens */
  pieces: (Piece | null)[];
  /** true when the sequence had to be cut to maxLen */
  truncated: boolean;
}

/** [CLS] first [SEP] (second [SEP])?, truncated from the tail to maxLen. */
export function encodeSequence(
  tokenizer: Tokenizer,
  first: Piece[],
  second: Piece[] | null,
  maxLen: number,
): EncodedSequence {
  const ids = [tokenizer.clsId];
  const segments = [0];
  const pieces: (Piece | null)[] = [null];
  for (const piece of first) {
    ids.push(piece.id);
    segments.push(0);
    pieces.push(piece);
  }
  ids.push(tokenizer.sepId);
  segments.push(0);
  pieces.push(null);
  if (second !== null) {
    for (const piece of second) {
      ids.push(piece.id);
      segments.push(1);
      pieces.push(piece);
    }
    ids.push(tokenizer.sepId);
    segments.push(1);
    pieces.push(null);
  }
  if (ids.length <= maxLen) {
    return { ids, segments, pieces, truncated: false };
  }
  // keep the final separator so the sequence stays well formed
  const cut = maxLen - 1;
  return {
    ids: [...ids.slice(0, cut), tokenizer.sepId],
    segments: [...segments.slice(0, cut), segments[segments.length - 1]],
    pieces: [...pieces.slice(0, cut), null],
    truncated: true,
  };
}
