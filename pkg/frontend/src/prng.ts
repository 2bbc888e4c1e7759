/**
 * Deterministic PRNG utilities.
 *
 * mulberry32 is used instead of Math.random so every invocation with the
 * same seed produces bit-identical training runs on any platform. The
 * generator is tiny but passes the statistical smoke tests that matter
 * for shuffling and weight init; cryptographic quality is not a goal.
 */

export type Rng = () => number;

/** 32-bit seeded generator returning floats in [0, 1). */
export function mulberry32(seed: number): Rng {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Standard normal via Box-Muller (consumes two uniforms per pair). */
export function gaussianSource(rng: Rng): Rng {
  let spare: number | null = null;
  return () => {
    if (spare !== null) {
      const value = spare;
      spare = null;
      return value;
    }
    let u = 0;
    while (u === 0) u = rng(); // avoid log(0)
    const v = rng();
    const radius = Math.sqrt(-2.0 * Math.log(u));
    const angle = 2.0 * Math.PI * v;
    spare = radius * Math.sin(angle);
    return radius * Math.cos(angle);
  };
}

/** In-place Fisher-Yates shuffle driven by the given generator. */
export function shuffle<T>(items: T[], rng: Rng): void {
  for (let i = items.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    const tmp = items[i];
    items[i] = items[j];
    items[j] = tmp;
  }
}
