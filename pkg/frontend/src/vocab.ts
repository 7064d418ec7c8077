/**
 * Frequency-ranked word vocabulary, capped at the configured size.
 *
 * The end marker always owns a slot. Ties in frequency break
 * alphabetically so the vocabulary is deterministic for a given corpus.
 */

import { TextPipelineConfig } from "./config.js";
import { tokenize } from "./tokenize.js";

export interface Vocabulary {
  size: number;
  endMarker: string;
  has(word: string): boolean;
  rank(word: string): number; // end marker = 0, then frequency order; -1 if OOV
}

export function buildVocabulary(corpus: string[], cfg: TextPipelineConfig): Vocabulary {
  const counts = new Map<string, number>();
  for (const doc of corpus) {
    for (const w of tokenize(doc)) {
      counts.set(w, (counts.get(w) ?? 0) + 1);
    }
  }
  const ranked = [...counts.entries()]
    .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1))
    .slice(0, cfg.vocabSize - 1)
    .map(([w]) => w);

  const index = new Map<string, number>();
  index.set(cfg.endMarker, 0);
  ranked.forEach((w, i) => index.set(w, i + 1));

  return {
    size: index.size,
    endMarker: cfg.endMarker,
    has: (w) => index.has(w),
    rank: (w) => index.get(w) ?? -1,
  };
}
