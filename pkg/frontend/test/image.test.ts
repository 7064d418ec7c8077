import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { beforeAll, describe, expect, it } from "vitest";
import { CONV_CHANNELS, CONV_GRID, GLOBAL_DIM } from "../src/config.js";
import { extractImageFeatures, ImageError, loadPixels } from "../src/image.js";
import { gradient, makePng, solid } from "./helpers.js";

let dir: string;
beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), "img-"));
});

describe("loadPixels", () => {
  it("resizes any input to the network grid", () => {
    const p = makePng(join(dir, "wide.png"), 100, 40, gradient);
    expect(loadPixels(p).length).toBe(64 * 64 * 3);
  });

  it("maps pixel values into [-0.5, 0.5]", () => {
    const p = makePng(join(dir, "white.png"), 8, 8, solid(255, 255, 255));
    const px = loadPixels(p);
    expect(Math.max(...px)).toBeLessThanOrEqual(0.5);
    expect(Math.min(...px)).toBeGreaterThanOrEqual(-0.5);
    expect(px[0]).toBeCloseTo(0.5, 5);
  });

  it("rejects non-PNG bytes", () => {
    const p = join(dir, "bad.png");
    writeFileSync(p, "not an image");
    expect(() => loadPixels(p)).toThrow(ImageError);
  });

  it("rejects a missing file", () => {
    expect(() => loadPixels(join(dir, "nope.png"))).toThrow(ImageError);
  });
});

describe("extractImageFeatures", () => {
  it("emits exactly the contract dims", () => {
    const p = makePng(join(dir, "g.png"), 32, 32, gradient);
    const f = extractImageFeatures(p);
    expect(f.global.length).toBe(GLOBAL_DIM);
    expect(f.conv.length).toBe(CONV_GRID * CONV_GRID * CONV_CHANNELS);
  });

  it("is deterministic: same image twice, identical vectors", () => {
    const p = makePng(join(dir, "d.png"), 24, 24, gradient);
    const a = extractImageFeatures(p);
    const b = extractImageFeatures(p);
    expect(a.global).toEqual(b.global);
    expect(a.conv).toEqual(b.conv);
  });

  it("all-black vs all-white produce differing vectors", () => {
    const black = extractImageFeatures(makePng(join(dir, "b.png"), 16, 16, solid(0, 0, 0)));
    const white = extractImageFeatures(makePng(join(dir, "w.png"), 16, 16, solid(255, 255, 255)));
    let diff = 0;
    for (let i = 0; i < GLOBAL_DIM; i++) diff += Math.abs(black.global[i] - white.global[i]);
    expect(diff).toBeGreaterThan(1.0);
  });

  it("outputs are finite float32", () => {
    const f = extractImageFeatures(makePng(join(dir, "f.png"), 20, 20, gradient));
    expect([...f.global].every(Number.isFinite)).toBe(true);
    expect([...f.conv].every(Number.isFinite)).toBe(true);
  });
});
