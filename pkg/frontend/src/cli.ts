/**
 * Command line entry point: evaluate one candidate model file.
 *
 * Usage: node cli.js [--config <path>] <code_path>
 *
 * The candidate file must declare `class Model` whose instances expose a
 * `hiddenLayers` array. The tool trains that architecture on the bundled
 * dataset under the fixed budget from the config file and prints a single
 * JSON line with the analytic parameter count and the lowest validation
 * error seen during training.
 *
 * Exit codes:
 *   0  evaluation succeeded, metrics line on stdout
 *   1  the candidate is untrainable (bad source, bad widths, diverged)
 *   2  the tool itself is misconfigured (bad arguments or config file)
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { loadDataset } from "./dataset";
import { TrainingConfig, TrainingDivergedError, trainAndEvaluate } from "./mlp";
import { ModelSpecError, loadModelSpec } from "./model";

const EXIT_OK = 0;
const EXIT_UNTRAINABLE = 1;
const EXIT_MISCONFIGURED = 2;

class ConfigurationError extends Error {}

const CONFIG_FIELDS = ["steps", "batchSize", "learningRate", "evalEvery", "seed"] as const;

function readTrainingConfig(configPath: string): TrainingConfig {
  let text: string;
  try {
    text = fs.readFileSync(configPath, "utf8");
  } catch (err) {
    throw new ConfigurationError(`cannot read config file ${configPath}: ${message(err)}`);
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    throw new ConfigurationError(`config file ${configPath} is not valid JSON: ${message(err)}`);
  }
  if (parsed === null || typeof parsed !== "object" || Array.isArray(parsed)) {
    throw new ConfigurationError(`config file ${configPath} must hold a JSON object`);
  }
  const record = parsed as Record<string, unknown>;
  for (const field of CONFIG_FIELDS) {
    const value = record[field];
    if (typeof value !== "number" || !Number.isFinite(value) || value <= 0) {
      throw new ConfigurationError(`config field ${field} must be a positive number`);
    }
    if (field !== "learningRate" && !Number.isInteger(value)) {
      throw new ConfigurationError(`config field ${field} must be an integer`);
    }
  }
  return {
    steps: record.steps as number,
    batchSize: record.batchSize as number,
    learningRate: record.learningRate as number,
    evalEvery: record.evalEvery as number,
    seed: record.seed as number,
  };
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export function main(argv: string[]): number {
  let positionals: string[];
  let configPath: string;
  try {
    const parsed = parseArgs({
      args: argv,
      options: { config: { type: "string" } },
      allowPositionals: true,
    });
    positionals = parsed.positionals;
    configPath = parsed.values.config ?? path.join(__dirname, "..", "config.json");
  } catch (err) {
    process.stderr.write(`argument error: ${message(err)}\n`);
    return EXIT_MISCONFIGURED;
  }
  if (positionals.length !== 1) {
    process.stderr.write("usage: cli.js [--config <path>] <code_path>\n");
    return EXIT_MISCONFIGURED;
  }

  let config: TrainingConfig;
  try {
    config = readTrainingConfig(configPath);
  } catch (err) {
    process.stderr.write(`${message(err)}\n`);
    return EXIT_MISCONFIGURED;
  }

  let source: string;
  try {
    source = fs.readFileSync(positionals[0], "utf8");
  } catch (err) {
    process.stderr.write(`cannot read candidate file: ${message(err)}\n`);
    return EXIT_MISCONFIGURED;
  }

  try {
    const spec = loadModelSpec(source);
    const result = trainAndEvaluate(spec.hiddenLayers, loadDataset(), config);
    process.stdout.write(
      JSON.stringify({ num_params: result.numParams, val_error: result.bestValError }) + "\n",
    );
    return EXIT_OK;
  } catch (err) {
    if (err instanceof ModelSpecError || err instanceof TrainingDivergedError) {
      process.stderr.write(`untrainable candidate: ${message(err)}\n`);
      return EXIT_UNTRAINABLE;
    }
    process.stderr.write(`unexpected failure: ${message(err)}\n`);
    return EXIT_UNTRAINABLE;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
