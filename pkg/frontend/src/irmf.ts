/**
 * IRMF1 interchange files and the dataset manifest.
 *
 * IRMF1: one UTF-8 JSON header line, then raw little-endian float32
 * payload in row-major order, record index == tweet id. The trainer reads
 * these back with a bit-exact round trip, so the writer never touches the
 * payload bytes beyond the Float32Array view itself.
 *
 * All writes go to a temp file in the target directory followed by an
 * atomic rename: a crashed export never leaves a partial file behind.
 */

import { mkdirSync, renameSync, rmSync, writeFileSync } from "fs";
import { dirname, join } from "path";

export const MAGIC = "IRMF1";

export type FeatureKind = "global" | "conv" | "text";

export class FormatError extends Error {}

function hostIsLittleEndian(): boolean {
  return new Uint8Array(new Uint16Array([1]).buffer)[0] === 1;
}

export function atomicWrite(path: string, data: Buffer | string): void {
  const tmp = join(dirname(path), `.${Date.now()}-${process.pid}.tmp`);
  try {
    writeFileSync(tmp, data);
    renameSync(tmp, path);
  } catch (e) {
    rmSync(tmp, { force: true });
    throw e;
  }
}

/** Serialize (count, ...dims) float32 records into an IRMF1 byte buffer. */
export function encodeFeatures(kind: FeatureKind, count: number, dims: number[], payload: Float32Array): Buffer {
  const expected = count * dims.reduce((a, b) => a * b, 1);
  if (payload.length !== expected) {
    throw new FormatError(`kind=${kind}: payload has ${payload.length} floats, header says ${expected}`);
  }
  const header = JSON.stringify({ magic: MAGIC, kind, count, dims, dtype: "f32le" }) + "\n";
  let bytes = Buffer.from(payload.buffer, payload.byteOffset, payload.byteLength);
  if (!hostIsLittleEndian()) {
    bytes = Buffer.from(bytes); // copy, then swap in place
    bytes.swap32();
  }
  return Buffer.concat([Buffer.from(header, "utf-8"), bytes]);
}

export function writeFeatures(path: string, kind: FeatureKind, count: number, dims: number[], payload: Float32Array): void {
  atomicWrite(path, encodeFeatures(kind, count, dims, payload));
}

/** Read-back used by tests; the trainer has its own independent reader. */
export function readFeatures(buf: Buffer): { kind: string; count: number; dims: number[]; payload: Float32Array } {
  const nl = buf.indexOf(0x0a);
  if (nl < 0) throw new FormatError("missing header line");
  const header = JSON.parse(buf.subarray(0, nl).toString("utf-8"));
  if (header.magic !== MAGIC) throw new FormatError(`bad magic ${header.magic}`);
  const body = buf.subarray(nl + 1);
  const expected = header.count * header.dims.reduce((a: number, b: number) => a * b, 1) * 4;
  if (body.length !== expected) {
    throw new FormatError(`payload length ${body.length}, expected ${expected}`);
  }
  const copy = Buffer.from(body);
  if (!hostIsLittleEndian()) copy.swap32();
  const payload = new Float32Array(copy.buffer, copy.byteOffset, copy.length / 4);
  return { kind: header.kind, count: header.count, dims: header.dims, payload };
}

function sortKeysDeep(value: any): any {
  if (Array.isArray(value)) return value.map(sortKeysDeep);
  if (value && typeof value === "object") {
    const out: Record<string, any> = {};
    for (const k of Object.keys(value).sort()) out[k] = sortKeysDeep(value[k]);
    return out;
  }
  return value;
}

export function writeManifest(
  path: string,
  files: { graph: string; global: string; conv: string; text: string },
  dims: Record<string, number[]>,
  extra: Record<string, any>,
): void {
  const doc = { format: MAGIC, ...files, dims, extra };
  atomicWrite(path, JSON.stringify(sortKeysDeep(doc), null, 2) + "\n");
}

export function ensureDir(path: string): void {
  mkdirSync(path, { recursive: true });
}
