/**
 * Command line entry point.
 *
 *   node dist/cli.js --records tweets.jsonl --graph graph.txt --out dataset/
 *
 * Exit codes: 0 success, 2 bad input.
 */

import { DEFAULT_TEXT_CONFIG } from "./config.js";
import { exportDataset } from "./export.js";
import { readRecords } from "./records.js";

function usage(): never {
  console.error("usage: cli.js --records FILE.jsonl --graph FILE.txt --out DIR");
  process.exit(2);
}

function main(argv: string[]): void {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || argv[i + 1] === undefined) usage();
    args.set(argv[i].slice(2), argv[i + 1]);
  }
  const records = args.get("records");
  const graph = args.get("graph");
  const out = args.get("out");
  if (!records || !graph || !out) usage();

  try {
    const report = exportDataset(readRecords(records), graph, out, DEFAULT_TEXT_CONFIG);
    console.log(
      `exported ${report.tweets} tweets to ${out} ` +
        `(${report.skippedImages.length} images skipped, ` +
        `${report.emptyTextIds.length} empty texts, ${report.oovSlots} OOV slots)`,
    );
  } catch (e) {
    console.error((e as Error).message);
    process.exit(2);
  }
}

main(process.argv.slice(2));
