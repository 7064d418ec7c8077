/**
 * Pipeline configuration for the text channel.
 *
 * The numbers are fixed per dataset and echoed into the manifest so the
 * trainer can verify it loads what the adapter wrote.
 */

export interface TextPipelineConfig {
  vocabSize: number; // vocabulary size, end marker included
  sentenceLen: number; // tokens per sentence after truncation/padding
  sentencesPerTweet: number; // context sentences kept per tweet
  wordDim: number; // word vector dimension
  endMarker: string; // token appended after the last real word
}

export const DEFAULT_TEXT_CONFIG: TextPipelineConfig = {
  vocabSize: 12500,
  sentenceLen: 12,
  sentencesPerTweet: 4,
  wordDim: 300,
  endMarker: "</s>",
};

export function validateTextConfig(cfg: TextPipelineConfig): void {
  if (cfg.vocabSize < 2) throw new Error("vocabSize must leave room for the end marker");
  if (cfg.sentenceLen < 2) throw new Error("sentenceLen must fit a word plus the end marker");
  if (cfg.sentencesPerTweet < 1 || cfg.wordDim < 1) {
    throw new Error("sentencesPerTweet and wordDim must be positive");
  }
  if (!cfg.endMarker) throw new Error("endMarker must be a non-empty token");
}

/** Image channel output shapes. The extractor is built to these exactly. */
export const GLOBAL_DIM = 1536;
export const CONV_GRID = 8;
export const CONV_CHANNELS = 1536;
