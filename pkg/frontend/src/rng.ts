/**
 * Small deterministic PRNG (splitmix32 stepping a mulberry32-style output).
 *
 * Everything the adapter generates (network weights, word vectors) must be
 * reproducible across runs and machines, so no Math.random anywhere.
 */

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** FNV-1a, used to derive per-token seeds from the token string. */
export function fnv1a(s: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

/** Fill with uniform values in [-scale, scale). */
export function fillUniform(out: Float32Array, rand: () => number, scale: number): void {
  for (let i = 0; i < out.length; i++) out[i] = (rand() * 2 - 1) * scale;
}
