/**
 * Dataset export: raw records + graph -> IRMF1 files the trainer loads.
 *
 * Record index in every feature file equals the tweet id, so records must
 * cover tweet ids densely from 0. A record whose image fails to decode is
 * skipped: its rows stay zero, and the failure lands in the sidecar error
 * report plus the manifest counts. Nothing is written unless the graph and
 * record list are structurally sound.
 */

import { copyFileSync, readFileSync } from "fs";
import { join } from "path";
import { CONV_CHANNELS, CONV_GRID, GLOBAL_DIM, TextPipelineConfig, validateTextConfig } from "./config.js";
import { buildEmbeddingTable } from "./embeddings.js";
import { extractImageFeatures, ImageError } from "./image.js";
import { atomicWrite, ensureDir, writeFeatures, writeManifest } from "./irmf.js";
import { RawTweetRecord } from "./records.js";
import { encodeText } from "./text.js";
import { buildVocabulary } from "./vocab.js";

export interface ExportReport {
  tweets: number;
  skippedImages: { tweetId: number; reason: string }[];
  emptyTextIds: number[];
  oovSlots: number;
  manifestPath: string;
}

export class ExportError extends Error {}

function checkGraph(graphPath: string, nTweets: number): void {
  const lines = readFileSync(graphPath, "utf-8").split("\n");
  lines.forEach((raw, i) => {
    const line = raw.trim();
    if (!line || line.startsWith("#")) return;
    const parts = line.split(/\s+/);
    if (parts.length !== 3 || !["R", "F"].includes(parts[0])) {
      throw new ExportError(`${graphPath}:${i + 1}: bad record ${JSON.stringify(line)}`);
    }
    if (parts[0] === "R" && Number(parts[1]) >= nTweets) {
      throw new ExportError(`${graphPath}:${i + 1}: tweet id ${parts[1]} has no feature record`);
    }
  });
}

export function exportDataset(
  records: RawTweetRecord[],
  graphPath: string,
  outDir: string,
  cfg: TextPipelineConfig,
): ExportReport {
  validateTextConfig(cfg);
  if (records.length === 0) throw new ExportError("no records to export");

  const byId = new Map(records.map((r) => [r.tweetId, r]));
  const nTweets = Math.max(...byId.keys()) + 1;
  for (let t = 0; t < nTweets; t++) {
    if (!byId.has(t)) throw new ExportError(`tweet ids must be dense from 0; missing ${t}`);
  }
  checkGraph(graphPath, nTweets);

  const vocab = buildVocabulary(records.flatMap((r) => r.texts), cfg);
  const table = buildEmbeddingTable(vocab, cfg);

  const globalAll = new Float32Array(nTweets * GLOBAL_DIM);
  const convAll = new Float32Array(nTweets * CONV_GRID * CONV_GRID * CONV_CHANNELS);
  const textSize = cfg.sentencesPerTweet * cfg.sentenceLen * cfg.wordDim;
  const textAll = new Float32Array(nTweets * textSize);

  const skipped: { tweetId: number; reason: string }[] = [];
  const emptyText: number[] = [];
  let oovSlots = 0;

  for (let t = 0; t < nTweets; t++) {
    const rec = byId.get(t)!;
    try {
      const img = extractImageFeatures(rec.imagePath);
      globalAll.set(img.global, t * GLOBAL_DIM);
      convAll.set(img.conv, t * CONV_GRID * CONV_GRID * CONV_CHANNELS);
    } catch (e) {
      if (!(e instanceof ImageError)) throw e;
      skipped.push({ tweetId: t, reason: e.message });
      console.error(`skipping image for tweet ${t}: ${e.message}`);
    }
    const enc = encodeText(rec.texts, cfg, table);
    textAll.set(enc.tensor, t * textSize);
    if (enc.empty) emptyText.push(t);
    oovSlots += enc.oovCount;
  }

  ensureDir(outDir);
  writeFeatures(join(outDir, "global.irmf"), "global", nTweets, [GLOBAL_DIM], globalAll);
  writeFeatures(join(outDir, "conv.irmf"), "conv", nTweets, [CONV_GRID, CONV_GRID, CONV_CHANNELS], convAll);
  writeFeatures(
    join(outDir, "text.irmf"), "text", nTweets,
    [cfg.sentencesPerTweet, cfg.sentenceLen, cfg.wordDim], textAll,
  );
  copyFileSync(graphPath, join(outDir, "graph.txt"));

  const manifestPath = join(outDir, "manifest.json");
  writeManifest(
    manifestPath,
    { graph: "graph.txt", global: "global.irmf", conv: "conv.irmf", text: "text.irmf" },
    {
      global: [GLOBAL_DIM],
      conv: [CONV_GRID, CONV_GRID, CONV_CHANNELS],
      text: [cfg.sentencesPerTweet, cfg.sentenceLen, cfg.wordDim],
    },
    {
      adapter: {
        textConfig: cfg,
        vocabBuilt: vocab.size,
        oovSlots,
        emptyTextIds: emptyText,
        skippedImages: skipped.map((s) => s.tweetId),
      },
    },
  );

  const report: ExportReport = {
    tweets: nTweets,
    skippedImages: skipped,
    emptyTextIds: emptyText,
    oovSlots,
    manifestPath,
  };
  atomicWrite(join(outDir, "export_report.json"), JSON.stringify(report, null, 2) + "\n");
  return report;
}
