/**
 * Text channel: sentences -> (sentencesPerTweet, sentenceLen, wordDim) tensor.
 *
 * Each raw string is one sentence. Rules:
 *   - tokenize (emoji/interjection filtering happens there)
 *   - truncate to sentenceLen - 1 words, append the end marker, then pad
 *     the remaining slots with the end marker vector
 *   - fewer sentences than sentencesPerTweet: repeat the last one
 *   - out-of-vocabulary word: zero vector in that slot, counted
 *   - no usable text at all: all-zero tensor, flagged
 */

import { TextPipelineConfig } from "./config.js";
import { EmbeddingTable } from "./embeddings.js";
import { tokenize } from "./tokenize.js";

export interface EncodedText {
  tensor: Float32Array; // row-major (sentencesPerTweet, sentenceLen, wordDim)
  empty: boolean; // true when the tweet had no usable text
  oovCount: number; // zero-vector slots caused by OOV words
}

function encodeSentence(
  words: string[],
  cfg: TextPipelineConfig,
  table: EmbeddingTable,
  out: Float32Array,
  offset: number,
): number {
  let oov = 0;
  const kept = words.slice(0, cfg.sentenceLen - 1);
  const endVec = table.lookup(cfg.endMarker);
  for (let slot = 0; slot < cfg.sentenceLen; slot++) {
    const vec = slot < kept.length ? table.lookup(kept[slot]) : endVec;
    if (vec === null) {
      oov++; // zero slot: Float32Array starts zeroed
      continue;
    }
    out.set(vec, offset + slot * cfg.wordDim);
  }
  return oov;
}

export function encodeText(
  texts: string[],
  cfg: TextPipelineConfig,
  table: EmbeddingTable,
): EncodedText {
  const size = cfg.sentencesPerTweet * cfg.sentenceLen * cfg.wordDim;
  const tensor = new Float32Array(size);

  const sentences = texts.map(tokenize).filter((ws) => ws.length > 0);
  if (sentences.length === 0) {
    return { tensor, empty: true, oovCount: 0 };
  }

  let oovCount = 0;
  const rowSize = cfg.sentenceLen * cfg.wordDim;
  for (let s = 0; s < cfg.sentencesPerTweet; s++) {
    // past the last real sentence, copy the last one as padding
    const words = sentences[Math.min(s, sentences.length - 1)];
    oovCount += encodeSentence(words, cfg, table, tensor, s * rowSize);
  }
  return { tensor, empty: false, oovCount };
}
