import { describe, expect, it } from "vitest";

import { VectorFileError, readVectors, writeVectors } from "../src/codec.js";
import { HashNgramEncoder } from "../src/hashEncoder.js";

function sampleRows(dim: number, seed: number, texts: string[]) {
  const encoder = new HashNgramEncoder(dim, seed);
  return texts.map((text, i) => ({ key: `k${i}`, vector: encoder.embed(text)! }));
}

describe("writeVectors / readVectors", () => {
  it("round-trips header fields, keys, order, and exact bytes", () => {
    const rows = sampleRows(32, 9, ["alpha beta", "gamma delta epsilon", "zeta"]);
    const buffer = writeVectors(32, "hash-ngram-v1:d32:s9", rows);
    const parsed = readVectors(buffer);
    expect(parsed.dim).toBe(32);
    expect(parsed.modelId).toBe("hash-ngram-v1:d32:s9");
    expect(parsed.rows.map((r) => r.key)).toEqual(["k0", "k1", "k2"]);
    for (let i = 0; i < rows.length; i++) {
      expect(
        Buffer.from(parsed.rows[i]!.vector.buffer).equals(Buffer.from(rows[i]!.vector.buffer)),
      ).toBe(true);
    }
  });

  it("writes the documented little-endian header layout", () => {
    const buffer = writeVectors(4, "m", [{ key: "k", vector: new Float32Array([1, 0, 0, 0]) }]);
    expect(buffer.toString("ascii", 0, 4)).toBe("RVEC");
    expect(buffer.readUInt16LE(4)).toBe(1); // format version
    expect(buffer.readUInt32LE(6)).toBe(4); // dim
    expect(Number(buffer.readBigUInt64LE(10))).toBe(1); // row count
    expect(buffer.readUInt16LE(18)).toBe(1); // model id length
    expect(buffer.toString("utf8", 20, 21)).toBe("m");
  });

  it("handles an empty row set", () => {
    const parsed = readVectors(writeVectors(8, "empty-model", []));
    expect(parsed.rows).toEqual([]);
    expect(parsed.dim).toBe(8);
  });

  it("rejects a vector of the wrong dimension on write", () => {
    const rows = [{ key: "k", vector: new Float32Array([1, 0]) }];
    expect(() => writeVectors(3, "m", rows)).toThrow(VectorFileError);
  });

  it("rejects an empty key on write", () => {
    const rows = [{ key: "", vector: new Float32Array([1, 0]) }];
    expect(() => writeVectors(2, "m", rows)).toThrow(VectorFileError);
  });

  it("rejects bad magic, truncation, and trailing bytes on read", () => {
    const good = writeVectors(4, "m", sampleRows(4, 0, ["one two three"]).slice(0, 1));
    expect(() => readVectors(Buffer.from("not a vector file"))).toThrow(VectorFileError);
    expect(() => readVectors(good.subarray(0, good.length - 3))).toThrow(VectorFileError);
    expect(() => readVectors(Buffer.concat([good, Buffer.from([0])]))).toThrow(VectorFileError);
  });

  it("rejects an unsupported format version", () => {
    const buffer = writeVectors(2, "m", []);
    buffer.writeUInt16LE(9, 4);
    expect(() => readVectors(buffer)).toThrow(/version/);
  });
});
