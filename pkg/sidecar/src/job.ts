/**
 * Embedding job: line-delimited (key, text) input to a binary vector file.
 *
 * The input is JSON lines, one `{"key": "...", "text": "..."}` object per
 * line; blank lines are ignored.  Rows whose text yields no tokens are
 * flagged and skipped (never written); every other row produces one unit
 * vector, written single-threaded in input order.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { writeVectors, type VectorRow } from "./codec.js";
import { HashNgramEncoder } from "./hashEncoder.js";

export class JobError extends Error {}

export interface EmbeddingJob {
  input: string;
  output: string;
  modelId: string;
  batchSize: number;
}

export interface JobReport {
  written: number;
  flagged: string[];
}

interface InputRow {
  key: string;
  text: string;
}

export function parseInputLines(content: string): InputRow[] {
  const rows: InputRow[] = [];
  const seen = new Set<string>();
  const lines = content.split(/\r?\n/);
  for (let lineno = 0; lineno < lines.length; lineno++) {
    const line = lines[lineno]!.trim();
    if (!line) {
      continue;
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch (err) {
      throw new JobError(`line ${lineno + 1}: not valid JSON (${(err as Error).message})`);
    }
    const obj = parsed as Record<string, unknown>;
    if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
      throw new JobError(`line ${lineno + 1}: expected an object with key and text`);
    }
    if (typeof obj.key !== "string" || obj.key.length === 0) {
      throw new JobError(`line ${lineno + 1}: key must be a non-empty string`);
    }
    if (typeof obj.text !== "string") {
      throw new JobError(`line ${lineno + 1}: text must be a string`);
    }
    if (seen.has(obj.key)) {
      throw new JobError(`line ${lineno + 1}: duplicate key ${JSON.stringify(obj.key)}`);
    }
    seen.add(obj.key);
    rows.push({ key: obj.key, text: obj.text });
  }
  return rows;
}

export function runJob(job: EmbeddingJob): JobReport {
  if (!Number.isInteger(job.batchSize) || job.batchSize <= 0) {
    throw new JobError(`batch size must be a positive integer, got ${job.batchSize}`);
  }
  const encoder = HashNgramEncoder.fromModelId(job.modelId);

  let content: string;
  try {
    content = readFileSync(job.input, "utf8");
  } catch (err) {
    throw new JobError(`cannot read input ${job.input}: ${(err as Error).message}`);
  }
  const inputRows = parseInputLines(content);

  const rows: VectorRow[] = [];
  const flagged: string[] = [];
  for (let start = 0; start < inputRows.length; start += job.batchSize) {
    for (const row of inputRows.slice(start, start + job.batchSize)) {
      const vector = encoder.embed(row.text);
      if (vector === null) {
        flagged.push(row.key);
      } else {
        rows.push({ key: row.key, vector });
      }
    }
  }

  writeFileSync(job.output, writeVectors(encoder.dim, encoder.modelId, rows));
  return { written: rows.length, flagged };
}
