/**
 * Raw input records: one JSON object per line.
 *
 * {"tweetId": 0, "imagePath": "img/0.png", "texts": ["caption", ...], "publisherId": 3}
 */

import { readFileSync } from "fs";

export interface RawTweetRecord {
  tweetId: number;
  imagePath: string;
  texts: string[];
  publisherId: number;
}

export class RecordError extends Error {}

export function parseRecord(line: string, lineno: number): RawTweetRecord {
  let obj: any;
  try {
    obj = JSON.parse(line);
  } catch {
    throw new RecordError(`line ${lineno}: not valid JSON`);
  }
  const { tweetId, imagePath, texts, publisherId } = obj ?? {};
  if (!Number.isInteger(tweetId) || tweetId < 0) {
    throw new RecordError(`line ${lineno}: tweetId must be a non-negative integer`);
  }
  if (typeof imagePath !== "string" || !imagePath) {
    throw new RecordError(`line ${lineno}: imagePath must be a non-empty string`);
  }
  if (!Array.isArray(texts) || texts.some((t: any) => typeof t !== "string")) {
    throw new RecordError(`line ${lineno}: texts must be a list of strings`);
  }
  if (!Number.isInteger(publisherId) || publisherId < 0) {
    throw new RecordError(`line ${lineno}: publisherId must be a non-negative integer`);
  }
  return { tweetId, imagePath, texts, publisherId };
}

export function readRecords(path: string): RawTweetRecord[] {
  const out: RawTweetRecord[] = [];
  const seen = new Set<number>();
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    const rec = parseRecord(line, i + 1);
    if (seen.has(rec.tweetId)) {
      throw new RecordError(`line ${i + 1}: duplicate tweetId ${rec.tweetId}`);
    }
    seen.add(rec.tweetId);
    out.push(rec);
  });
  return out;
}
