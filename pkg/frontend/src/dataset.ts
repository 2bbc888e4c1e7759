/**
 * The bundled toy classification set: 40 features, 10 classes.
 *
 * The data is generated, not shipped as a file: a fixed literal seed makes
 * every invocation see byte-identical examples, which is all "bundled"
 * needs to mean here. Each class is a Gaussian blob around its own
 * centroid; blobs overlap enough that capacity and training actually
 * matter. The last 500 examples are the validation split, held fixed
 * across all invocations and containing 50 examples of each class.
 */

import { gaussianSource, mulberry32 } from "./prng";

export const INPUT_DIM = 40;
export const NUM_CLASSES = 10;
export const TOTAL_EXAMPLES = 3000;
export const VALIDATION_EXAMPLES = 500;

const DATASET_SEED = 0x5eed01;
// Keeps the class blobs close enough that the Bayes error is well above
// zero; with unit noise every architecture would otherwise reach ~0 error
// and the evaluator could not rank candidates.
const CENTROID_SCALE = 0.35;

export interface Dataset {
  trainX: Float64Array[];
  trainY: Int32Array;
  valX: Float64Array[];
  valY: Int32Array;
}

let cached: Dataset | null = null;

export function loadDataset(): Dataset {
  if (cached) return cached;
  const normal = gaussianSource(mulberry32(DATASET_SEED));

  const centroids: Float64Array[] = [];
  for (let c = 0; c < NUM_CLASSES; c++) {
    const centroid = new Float64Array(INPUT_DIM);
    for (let d = 0; d < INPUT_DIM; d++) centroid[d] = CENTROID_SCALE * normal();
    centroids.push(centroid);
  }

  const xs: Float64Array[] = [];
  const ys = new Int32Array(TOTAL_EXAMPLES);
  for (let i = 0; i < TOTAL_EXAMPLES; i++) {
    const label = i % NUM_CLASSES; // round-robin keeps every split balanced
    const centroid = centroids[label];
    const x = new Float64Array(INPUT_DIM);
    for (let d = 0; d < INPUT_DIM; d++) x[d] = centroid[d] + normal();
    xs.push(x);
    ys[i] = label;
  }

  const split = TOTAL_EXAMPLES - VALIDATION_EXAMPLES;
  cached = {
    trainX: xs.slice(0, split),
    trainY: ys.slice(0, split),
    valX: xs.slice(split),
    valY: ys.slice(split),
  };
  return cached;
}
