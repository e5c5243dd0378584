#!/usr/bin/env node
/**
 * Command line entry point.
 *
 * Usage:
 *   raimpact-embedder --input items.jsonl --output vectors.rvec \
 *       --model hash-ngram-v1:d256:s0 [--batch-size 32]
 *
 * Exit codes: 0 success, 2 bad invocation or unreadable input, 1 job failure
 * (including a model id that cannot be loaded).
 */

import { parseArgs } from "node:util";

import { ModelError } from "./hashEncoder.js";
import { JobError, runJob } from "./job.js";

const USAGE = `usage: raimpact-embedder --input <jsonl> --output <rvec> --model <id> [--batch-size <n>]

  --input       line-delimited JSON file: {"key": "...", "text": "..."} per line
  --output      binary vector file to write
  --model       model id, e.g. hash-ngram-v1:d256:s0
  --batch-size  rows embedded per batch (default 32)
`;

function main(): number {
  let values: Record<string, unknown>;
  try {
    ({ values } = parseArgs({
      options: {
        input: { type: "string", short: "i" },
        output: { type: "string", short: "o" },
        model: { type: "string", short: "m" },
        "batch-size": { type: "string", default: "32" },
        help: { type: "boolean", short: "h", default: false },
      },
    }));
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  if (values.help) {
    process.stdout.write(USAGE);
    return 0;
  }
  for (const flag of ["input", "output", "model"] as const) {
    if (typeof values[flag] !== "string") {
      process.stderr.write(`missing required --${flag}\n${USAGE}`);
      return 2;
    }
  }
  const batchSize = Number(values["batch-size"]);
  if (!Number.isInteger(batchSize) || batchSize <= 0) {
    process.stderr.write(`--batch-size must be a positive integer, got ${values["batch-size"]}\n`);
    return 2;
  }

  try {
    const report = runJob({
      input: values.input as string,
      output: values.output as string,
      modelId: values.model as string,
      batchSize,
    });
    for (const key of report.flagged) {
      process.stderr.write(`warning: empty text for key ${JSON.stringify(key)}; row flagged and not written\n`);
    }
    process.stdout.write(`wrote ${report.written} vectors to ${values.output} (${report.flagged.length} flagged)\n`);
    return 0;
  } catch (err) {
    if (err instanceof JobError && err.message.startsWith("cannot read input")) {
      process.stderr.write(`${err.message}\n`);
      return 2;
    }
    if (err instanceof ModelError || err instanceof JobError) {
      process.stderr.write(`${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

process.exit(main());
