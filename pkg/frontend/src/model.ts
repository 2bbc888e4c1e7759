/**
 * Loading and validating candidate model definitions.
 *
 * A candidate is a JavaScript source file that declares `class Model`; an
 * instance exposes a `hiddenLayers` array of layer widths. The source runs
 * inside an isolated vm context with no access to require, process, or the
 * host globals, so a malformed or hostile candidate can throw but not
 * reach outward. Any problem with the candidate itself (syntax errors,
 * missing class, bad widths, runaway constructors) is a ModelSpecError,
 * which callers map to the "untrainable" outcome.
 */

import * as vm from "node:vm";

const MAX_HIDDEN_LAYERS = 8;
const MAX_LAYER_WIDTH = 1024;
const LOAD_TIMEOUT_MS = 2000;

export class ModelSpecError extends Error {}

export interface ModelSpec {
  hiddenLayers: number[];
}

export function loadModelSpec(source: string): ModelSpec {
  const context = vm.createContext(Object.create(null));
  let modelClass: unknown;
  try {
    vm.runInContext(source, context, { timeout: LOAD_TIMEOUT_MS });
    // Class declarations are lexical bindings, invisible on the context
    // object itself; a second script in the same context can still see them.
    modelClass = vm.runInContext(
      'typeof Model === "function" ? Model : undefined',
      context,
      { timeout: LOAD_TIMEOUT_MS },
    );
  } catch (err) {
    throw new ModelSpecError(`candidate source failed to run: ${describe(err)}`);
  }
  if (typeof modelClass !== "function") {
    throw new ModelSpecError("candidate source does not define a Model class");
  }

  let instance: unknown;
  try {
    instance = vm.runInContext("new Model()", context, { timeout: LOAD_TIMEOUT_MS });
  } catch (err) {
    throw new ModelSpecError(`Model constructor failed: ${describe(err)}`);
  }
  if (instance === null || typeof instance !== "object") {
    throw new ModelSpecError("Model constructor did not produce an object");
  }

  const raw = (instance as { hiddenLayers?: unknown }).hiddenLayers;
  return { hiddenLayers: validateHiddenLayers(raw) };
}

function validateHiddenLayers(raw: unknown): number[] {
  if (!Array.isArray(raw)) {
    throw new ModelSpecError("hiddenLayers must be an array of layer widths");
  }
  if (raw.length > MAX_HIDDEN_LAYERS) {
    throw new ModelSpecError(`too many hidden layers: ${raw.length} > ${MAX_HIDDEN_LAYERS}`);
  }
  const widths: number[] = [];
  for (const value of raw) {
    if (typeof value !== "number" || !Number.isInteger(value)) {
      throw new ModelSpecError(`layer width ${String(value)} is not an integer`);
    }
    if (value < 1 || value > MAX_LAYER_WIDTH) {
      throw new ModelSpecError(`layer width ${value} outside 1..${MAX_LAYER_WIDTH}`);
    }
    widths.push(value);
  }
  return widths;
}

function describe(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
