/**
 * Deterministic 300-d word vectors.
 *
 * A real deployment would load pre-trained GloVe vectors here. This adapter
 * ships a seeded stand-in instead: each in-vocabulary word gets a fixed
 * pseudo-random unit-scale vector derived from its spelling, so the same
 * word always maps to the same vector on any machine. Out-of-vocabulary
 * words map to the zero vector and are counted for the manifest.
 */

import { TextPipelineConfig } from "./config.js";
import { Vocabulary } from "./vocab.js";
import { fillUniform, fnv1a, mulberry32 } from "./rng.js";

const TABLE_SEED = 0x9e3779b9;

export interface EmbeddingTable {
  dim: number;
  /** Vector for a word, or null when the word is out of vocabulary. */
  lookup(word: string): Float32Array | null;
}

export function buildEmbeddingTable(vocab: Vocabulary, cfg: TextPipelineConfig): EmbeddingTable {
  const cache = new Map<string, Float32Array>();
  const scale = Math.sqrt(3 / cfg.wordDim); // unit variance per vector, roughly

  return {
    dim: cfg.wordDim,
    lookup(word: string): Float32Array | null {
      if (!vocab.has(word)) return null;
      let v = cache.get(word);
      if (!v) {
        v = new Float32Array(cfg.wordDim);
        fillUniform(v, mulberry32(fnv1a(word) ^ TABLE_SEED), scale);
        cache.set(word, v);
      }
      return v;
    },
  };
}
