/**
 * A small fully connected classifier trained with mini-batch SGD.
 *
 * Parameter counts are computed analytically from the layer sizes (each
 * dense layer contributes in*out weights plus out biases), so the number
 * reported for a candidate never depends on how training went. Training
 * itself is plain backprop: tanh hidden activations, softmax cross-entropy
 * on the output, and a fixed-seed shuffle-free batch schedule so the same
 * configuration always produces the same trajectory.
 */

import { Dataset } from "./dataset";
import { Rng, gaussianSource, mulberry32 } from "./prng";

export interface TrainingConfig {
  steps: number;
  batchSize: number;
  learningRate: number;
  evalEvery: number;
  seed: number;
}

export interface TrainingResult {
  numParams: number;
  bestValError: number;
}

export class TrainingDivergedError extends Error {}

export function layerSizes(inputDim: number, hiddenLayers: number[], numClasses: number): number[] {
  return [inputDim, ...hiddenLayers, numClasses];
}

export function countParams(sizes: number[]): number {
  let total = 0;
  for (let i = 0; i + 1 < sizes.length; i++) {
    total += sizes[i] * sizes[i + 1] + sizes[i + 1];
  }
  return total;
}

interface Layer {
  weights: Float64Array; // row-major, [out][in]
  biases: Float64Array;
  inDim: number;
  outDim: number;
}

function initLayer(inDim: number, outDim: number, normal: () => number): Layer {
  const weights = new Float64Array(inDim * outDim);
  const scale = 1 / Math.sqrt(inDim);
  for (let i = 0; i < weights.length; i++) weights[i] = scale * normal();
  return { weights, biases: new Float64Array(outDim), inDim, outDim };
}

function affine(layer: Layer, x: Float64Array): Float64Array {
  const out = new Float64Array(layer.outDim);
  for (let o = 0; o < layer.outDim; o++) {
    let acc = layer.biases[o];
    const row = o * layer.inDim;
    for (let i = 0; i < layer.inDim; i++) acc += layer.weights[row + i] * x[i];
    out[o] = acc;
  }
  return out;
}

function softmax(logits: Float64Array): Float64Array {
  let max = -Infinity;
  for (const v of logits) if (v > max) max = v;
  const probs = new Float64Array(logits.length);
  let sum = 0;
  for (let i = 0; i < logits.length; i++) {
    const e = Math.exp(logits[i] - max);
    probs[i] = e;
    sum += e;
  }
  for (let i = 0; i < probs.length; i++) probs[i] /= sum;
  return probs;
}

export class Mlp {
  readonly sizes: number[];
  private readonly layers: Layer[];

  constructor(sizes: number[], rng: Rng) {
    this.sizes = sizes;
    const normal = gaussianSource(rng);
    this.layers = [];
    for (let i = 0; i + 1 < sizes.length; i++) {
      this.layers.push(initLayer(sizes[i], sizes[i + 1], normal));
    }
  }

  get numParams(): number {
    return countParams(this.sizes);
  }

  /** Class probabilities for one example. */
  predict(x: Float64Array): Float64Array {
    let h = x;
    for (let i = 0; i < this.layers.length; i++) {
      h = affine(this.layers[i], h);
      if (i + 1 < this.layers.length) {
        for (let j = 0; j < h.length; j++) h[j] = Math.tanh(h[j]);
      }
    }
    return softmax(h);
  }

  /** Fraction of examples whose argmax class is wrong. */
  errorRate(xs: Float64Array[], ys: Int32Array): number {
    let wrong = 0;
    for (let i = 0; i < xs.length; i++) {
      const probs = this.predict(xs[i]);
      let best = 0;
      for (let c = 1; c < probs.length; c++) if (probs[c] > probs[best]) best = c;
      if (best !== ys[i]) wrong++;
    }
    return wrong / xs.length;
  }

  /**
   * One SGD step on a batch. Returns the mean cross-entropy loss, which the
   * caller should check for finiteness: exploding weights show up here first.
   */
  trainBatch(xs: Float64Array[], ys: Int32Array, indices: number[], learningRate: number): number {
    const nLayers = this.layers.length;
    const gradW = this.layers.map((l) => new Float64Array(l.weights.length));
    const gradB = this.layers.map((l) => new Float64Array(l.biases.length));
    let loss = 0;

    for (const idx of indices) {
      const x = xs[idx];
      const y = ys[idx];

      // Forward pass, keeping the post-activation output of every layer.
      const activations: Float64Array[] = [x];
      let h = x;
      for (let i = 0; i < nLayers; i++) {
        h = affine(this.layers[i], h);
        if (i + 1 < nLayers) {
          for (let j = 0; j < h.length; j++) h[j] = Math.tanh(h[j]);
        }
        activations.push(h);
      }
      const probs = softmax(h);
      loss += -Math.log(Math.max(probs[y], 1e-12));

      // Backward pass. Softmax + cross-entropy gives probs - onehot directly.
      let delta = new Float64Array(probs.length);
      for (let c = 0; c < probs.length; c++) delta[c] = probs[c] - (c === y ? 1 : 0);

      for (let i = nLayers - 1; i >= 0; i--) {
        const layer = this.layers[i];
        const input = activations[i];
        const gw = gradW[i];
        const gb = gradB[i];
        for (let o = 0; o < layer.outDim; o++) {
          gb[o] += delta[o];
          const row = o * layer.inDim;
          for (let j = 0; j < layer.inDim; j++) gw[row + j] += delta[o] * input[j];
        }
        if (i > 0) {
          const prev = new Float64Array(layer.inDim);
          for (let j = 0; j < layer.inDim; j++) {
            let acc = 0;
            for (let o = 0; o < layer.outDim; o++) acc += layer.weights[o * layer.inDim + j] * delta[o];
            const a = activations[i][j]; // tanh output of the layer below
            prev[j] = acc * (1 - a * a);
          }
          delta = prev;
        }
      }
    }

    const scale = learningRate / indices.length;
    for (let i = 0; i < nLayers; i++) {
      const layer = this.layers[i];
      for (let j = 0; j < layer.weights.length; j++) layer.weights[j] -= scale * gradW[i][j];
      for (let j = 0; j < layer.biases.length; j++) layer.biases[j] -= scale * gradB[i][j];
    }
    return loss / indices.length;
  }
}

/**
 * Train a network on the dataset and report the analytic parameter count
 * together with the lowest validation error observed at any checkpoint.
 * Checkpoints happen every `evalEvery` steps and once more after the final
 * step, so short runs still measure validation at least once.
 */
export function trainAndEvaluate(
  hiddenLayers: number[],
  data: Dataset,
  config: TrainingConfig,
): TrainingResult {
  const sizes = layerSizes(data.trainX[0].length, hiddenLayers, 10);
  const rng = mulberry32(config.seed);
  const model = new Mlp(sizes, rng);

  const nTrain = data.trainX.length;
  let bestValError = model.errorRate(data.valX, data.valY);

  for (let step = 0; step < config.steps; step++) {
    const indices: number[] = [];
    for (let b = 0; b < config.batchSize; b++) {
      indices.push(Math.floor(rng() * nTrain));
    }
    const loss = model.trainBatch(data.trainX, data.trainY, indices, config.learningRate);
    if (!Number.isFinite(loss)) {
      throw new TrainingDivergedError(`loss became ${loss} at step ${step}`);
    }
    const isLast = step === config.steps - 1;
    if ((step + 1) % config.evalEvery === 0 || isLast) {
      const err = model.errorRate(data.valX, data.valY);
      if (err < bestValError) bestValError = err;
    }
  }

  return { numParams: model.numParams, bestValError };
}
