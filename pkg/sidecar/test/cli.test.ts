import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeAll, describe, expect, it } from "vitest";

import { readVectors } from "../src/codec.js";
import { runJob } from "../src/job.js";

const CLI = join(fileURLToPath(new URL(".", import.meta.url)), "..", "dist", "cli.js");
const MODEL = "hash-ngram-v1:d64:s5";

interface CliResult {
  status: number;
  stdout: string;
  stderr: string;
}

function cli(args: string[]): CliResult {
  const proc = spawnSync("node", [CLI, ...args], { encoding: "utf8" });
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

function fixtureLines(): string[] {
  const lines: string[] = [];
  for (let i = 0; i < 100; i++) {
    // rows 10, 50, 90 carry no tokens and must be flagged, not written
    const text = i % 40 === 10 ? "???" : `paper number ${i} on topic ${i % 7}`;
    lines.push(JSON.stringify({ key: `row-${i.toString().padStart(3, "0")}`, text }));
  }
  return lines;
}

describe("embedding CLI", () => {
  let dir: string;
  let input: string;

  beforeAll(() => {
    dir = mkdtempSync(join(tmpdir(), "embedder-"));
    input = join(dir, "items.jsonl");
    writeFileSync(input, fixtureLines().join("\n") + "\n");
  });

  it("writes input count minus flagged rows and exits 0", () => {
    const output = join(dir, "out.rvec");
    const result = cli(["--input", input, "--output", output, "--model", MODEL]);
    expect(result.status).toBe(0);
    expect(result.stdout).toContain("wrote 97 vectors");
    expect(result.stderr).toContain("row-010");

    const parsed = readVectors(readFileSync(output));
    expect(parsed.modelId).toBe(MODEL);
    expect(parsed.rows.length).toBe(97);
    const keys = new Set(parsed.rows.map((r) => r.key));
    expect(keys.has("row-010")).toBe(false);
    expect(keys.has("row-050")).toBe(false);
    expect(keys.has("row-090")).toBe(false);
    for (const row of parsed.rows) {
      let sum = 0;
      for (const component of row.vector) {
        sum += component * component;
      }
      expect(Math.abs(Math.sqrt(sum) - 1)).toBeLessThanOrEqual(1e-6);
    }
  });

  it("produces identical bytes across two runs and any batch size", () => {
    const a = join(dir, "a.rvec");
    const b = join(dir, "b.rvec");
    const c = join(dir, "c.rvec");
    expect(cli(["--input", input, "--output", a, "--model", MODEL]).status).toBe(0);
    expect(cli(["--input", input, "--output", b, "--model", MODEL]).status).toBe(0);
    expect(cli(["--input", input, "--output", c, "--model", MODEL, "--batch-size", "7"]).status).toBe(0);
    const bytes = readFileSync(a);
    expect(readFileSync(b).equals(bytes)).toBe(true);
    expect(readFileSync(c).equals(bytes)).toBe(true);
  });

  it("aborts with exit 1 when the model cannot be loaded", () => {
    const result = cli(["--input", input, "--output", join(dir, "x.rvec"), "--model", "st5-base"]);
    expect(result.status).toBe(1);
    expect(result.stderr).toContain("cannot load model");
  });

  it("exits 2 on a missing required flag", () => {
    const result = cli(["--input", input, "--model", MODEL]);
    expect(result.status).toBe(2);
    expect(result.stderr).toContain("--output");
  });

  it("exits 2 on an unreadable input file", () => {
    const result = cli([
      "--input",
      join(dir, "no-such-file.jsonl"),
      "--output",
      join(dir, "y.rvec"),
      "--model",
      MODEL,
    ]);
    expect(result.status).toBe(2);
    expect(result.stderr).toContain("cannot read input");
  });

  it("exits 2 on a non-numeric batch size", () => {
    const result = cli([
      "--input", input, "--output", join(dir, "z.rvec"), "--model", MODEL, "--batch-size", "many",
    ]);
    expect(result.status).toBe(2);
  });
});

describe("runJob", () => {
  it("rejects malformed input rows with line numbers", () => {
    const dir = mkdtempSync(join(tmpdir(), "embedder-"));
    const input = join(dir, "bad.jsonl");
    writeFileSync(input, '{"key": "a", "text": "fine"}\n{"key": 3, "text": "bad"}\n');
    expect(() =>
      runJob({ input, output: join(dir, "out.rvec"), modelId: MODEL, batchSize: 8 }),
    ).toThrow(/line 2/);
  });

  it("rejects duplicate keys", () => {
    const dir = mkdtempSync(join(tmpdir(), "embedder-"));
    const input = join(dir, "dup.jsonl");
    writeFileSync(input, '{"key": "a", "text": "one"}\n{"key": "a", "text": "two"}\n');
    expect(() =>
      runJob({ input, output: join(dir, "out.rvec"), modelId: MODEL, batchSize: 8 }),
    ).toThrow(/duplicate key/);
  });
});
