/**
 * Image channel: PNG -> global descriptor (1536) + conv feature map (8x8x1536).
 *
 * A production deployment would run a large pre-trained classification
 * network here and tap its last fully-connected and last 8x8 convolutional
 * layers. This adapter ships a small fixed convolutional network with
 * seeded weights instead: same output contract (shapes, float32,
 * deterministic inference), no downloaded checkpoint. The weights are
 * frozen by the seed below; changing it changes every exported dataset.
 */

import { readFileSync } from "fs";
import { PNG } from "pngjs";
import { CONV_CHANNELS, CONV_GRID, GLOBAL_DIM } from "./config.js";
import { fillUniform, mulberry32 } from "./rng.js";

const WEIGHT_SEED = 0x51f15eed;
const INPUT_SIZE = 64;

export class ImageError extends Error {}

export interface ImageFeatures {
  global: Float32Array; // (1536,)
  conv: Float32Array; // row-major (8, 8, 1536)
}

/** Decode a PNG into HWC float RGB in [-0.5, 0.5], bilinearly resized. */
export function loadPixels(path: string, size = INPUT_SIZE): Float32Array {
  let png: PNG;
  try {
    png = PNG.sync.read(readFileSync(path));
  } catch (e) {
    throw new ImageError(`cannot decode ${path}: ${(e as Error).message}`);
  }
  const { width, height, data } = png;
  const out = new Float32Array(size * size * 3);
  for (let y = 0; y < size; y++) {
    const sy = ((y + 0.5) * height) / size - 0.5;
    const y0 = Math.max(0, Math.floor(sy));
    const y1 = Math.min(height - 1, y0 + 1);
    const fy = Math.min(1, Math.max(0, sy - y0));
    for (let x = 0; x < size; x++) {
      const sx = ((x + 0.5) * width) / size - 0.5;
      const x0 = Math.max(0, Math.floor(sx));
      const x1 = Math.min(width - 1, x0 + 1);
      const fx = Math.min(1, Math.max(0, sx - x0));
      for (let c = 0; c < 3; c++) {
        const p00 = data[(y0 * width + x0) * 4 + c];
        const p01 = data[(y0 * width + x1) * 4 + c];
        const p10 = data[(y1 * width + x0) * 4 + c];
        const p11 = data[(y1 * width + x1) * 4 + c];
        const top = p00 + (p01 - p00) * fx;
        const bot = p10 + (p11 - p10) * fx;
        out[(y * size + x) * 3 + c] = (top + (bot - top) * fy) / 255 - 0.5;
      }
    }
  }
  return out;
}

interface ConvLayer {
  inC: number;
  outC: number;
  weights: Float32Array; // (outC, 3, 3, inC)
  bias: Float32Array;
}

function makeLayer(inC: number, outC: number, rand: () => number): ConvLayer {
  const weights = new Float32Array(outC * 9 * inC);
  const bias = new Float32Array(outC);
  fillUniform(weights, rand, Math.sqrt(2 / (9 * inC)));
  fillUniform(bias, rand, 0.05);
  return { inC, outC, weights, bias };
}

/** 3x3 stride-2 convolution with ReLU, zero padding 1. HWC layout. */
function convDown(input: Float32Array, size: number, layer: ConvLayer): Float32Array {
  const { inC, outC, weights, bias } = layer;
  const outSize = size / 2;
  const out = new Float32Array(outSize * outSize * outC);
  for (let oy = 0; oy < outSize; oy++) {
    for (let ox = 0; ox < outSize; ox++) {
      for (let oc = 0; oc < outC; oc++) {
        let acc = bias[oc];
        for (let ky = 0; ky < 3; ky++) {
          const iy = oy * 2 + ky - 1;
          if (iy < 0 || iy >= size) continue;
          for (let kx = 0; kx < 3; kx++) {
            const ix = ox * 2 + kx - 1;
            if (ix < 0 || ix >= size) continue;
            const ibase = (iy * size + ix) * inC;
            const wbase = oc * 9 * inC + (ky * 3 + kx) * inC;
            for (let ic = 0; ic < inC; ic++) {
              acc += input[ibase + ic] * weights[wbase + ic];
            }
          }
        }
        out[(oy * outSize + ox) * outC + oc] = acc > 0 ? acc : 0;
      }
    }
  }
  return out;
}

interface Network {
  layers: ConvLayer[];
  proj: Float32Array; // 1x1 conv: (CONV_CHANNELS, backboneC)
  projBias: Float32Array;
  fc: Float32Array; // dense: (GLOBAL_DIM, backboneC)
  fcBias: Float32Array;
  backboneC: number;
}

let network: Network | null = null;

function getNetwork(): Network {
  if (network) return network;
  const rand = mulberry32(WEIGHT_SEED);
  const layers = [makeLayer(3, 16, rand), makeLayer(16, 32, rand), makeLayer(32, 64, rand)];
  const backboneC = 64;
  const proj = new Float32Array(CONV_CHANNELS * backboneC);
  const projBias = new Float32Array(CONV_CHANNELS);
  const fc = new Float32Array(GLOBAL_DIM * backboneC);
  const fcBias = new Float32Array(GLOBAL_DIM);
  fillUniform(proj, rand, Math.sqrt(2 / backboneC));
  fillUniform(projBias, rand, 0.05);
  fillUniform(fc, rand, Math.sqrt(2 / backboneC));
  fillUniform(fcBias, rand, 0.05);
  network = { layers, proj, projBias, fc, fcBias, backboneC };
  return network;
}

export function extractImageFeatures(imagePath: string): ImageFeatures {
  const net = getNetwork();
  let act = loadPixels(imagePath);
  let size = INPUT_SIZE;
  for (const layer of net.layers) {
    act = convDown(act, size, layer);
    size /= 2;
  }
  // act is now (CONV_GRID, CONV_GRID, backboneC)
  const C = net.backboneC;

  const conv = new Float32Array(CONV_GRID * CONV_GRID * CONV_CHANNELS);
  for (let cell = 0; cell < CONV_GRID * CONV_GRID; cell++) {
    const ibase = cell * C;
    for (let oc = 0; oc < CONV_CHANNELS; oc++) {
      let acc = net.projBias[oc];
      const wbase = oc * C;
      for (let ic = 0; ic < C; ic++) acc += act[ibase + ic] * net.proj[wbase + ic];
      conv[cell * CONV_CHANNELS + oc] = acc > 0 ? acc : 0;
    }
  }

  const pooled = new Float32Array(C);
  for (let cell = 0; cell < CONV_GRID * CONV_GRID; cell++) {
    for (let ic = 0; ic < C; ic++) pooled[ic] += act[cell * C + ic];
  }
  for (let ic = 0; ic < C; ic++) pooled[ic] /= CONV_GRID * CONV_GRID;

  const global = new Float32Array(GLOBAL_DIM);
  for (let oc = 0; oc < GLOBAL_DIM; oc++) {
    let acc = net.fcBias[oc];
    const wbase = oc * C;
    for (let ic = 0; ic < C; ic++) acc += pooled[ic] * net.fc[wbase + ic];
    global[oc] = acc > 0 ? acc : 0;
  }

  return { global, conv };
}
