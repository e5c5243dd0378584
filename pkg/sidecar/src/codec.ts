/**
 * Binary vector-file codec.
 *
 * Layout (little-endian, packed, no alignment padding):
 *   bytes 0-3    magic "RVEC"
 *   bytes 4-5    u16 format version (1)
 *   bytes 6-9    u32 dimension
 *   bytes 10-17  u64 row count
 *   bytes 18-19  u16 model-id byte length
 *   then the UTF-8 model id, then per row: u16 key byte length, the UTF-8
 *   key, and `dimension` float32 components.
 */

const MAGIC = "RVEC";
const FORMAT_VERSION = 1;
const HEADER_BYTES = 20;

export class VectorFileError extends Error {}

export interface VectorRow {
  key: string;
  vector: Float32Array;
}

export interface VectorFile {
  dim: number;
  modelId: string;
  rows: VectorRow[];
}

/** Serialize rows into one buffer; rows keep their input order. */
export function writeVectors(dim: number, modelId: string, rows: VectorRow[]): Buffer {
  if (!Number.isInteger(dim) || dim <= 0) {
    throw new VectorFileError(`dim must be a positive integer, got ${dim}`);
  }
  const modelBytes = Buffer.from(modelId, "utf8");
  if (modelBytes.length > 0xffff) {
    throw new VectorFileError("model id exceeds 65535 UTF-8 bytes");
  }

  const chunks: Buffer[] = [];
  const header = Buffer.alloc(HEADER_BYTES);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt16LE(FORMAT_VERSION, 4);
  header.writeUInt32LE(dim, 6);
  header.writeBigUInt64LE(BigInt(rows.length), 10);
  header.writeUInt16LE(modelBytes.length, 18);
  chunks.push(header, modelBytes);

  for (const row of rows) {
    const keyBytes = Buffer.from(row.key, "utf8");
    if (keyBytes.length === 0 || keyBytes.length > 0xffff) {
      throw new VectorFileError(`key ${JSON.stringify(row.key)} must be 1-65535 UTF-8 bytes`);
    }
    if (row.vector.length !== dim) {
      throw new VectorFileError(
        `key ${JSON.stringify(row.key)}: expected dim ${dim}, got ${row.vector.length}`,
      );
    }
    const keyLen = Buffer.alloc(2);
    keyLen.writeUInt16LE(keyBytes.length, 0);
    const payload = Buffer.alloc(4 * dim);
    for (let k = 0; k < dim; k++) {
      payload.writeFloatLE(row.vector[k]!, 4 * k);
    }
    chunks.push(keyLen, keyBytes, payload);
  }
  return Buffer.concat(chunks);
}

/** Parse a buffer produced by `writeVectors` (or the engine's own writer). */
export function readVectors(buffer: Buffer): VectorFile {
  if (buffer.length < HEADER_BYTES || buffer.toString("ascii", 0, 4) !== MAGIC) {
    throw new VectorFileError("bad magic: not a vector file");
  }
  const version = buffer.readUInt16LE(4);
  if (version !== FORMAT_VERSION) {
    throw new VectorFileError(`unsupported format version ${version}`);
  }
  const dim = buffer.readUInt32LE(6);
  const count = Number(buffer.readBigUInt64LE(10));
  const modelLen = buffer.readUInt16LE(18);
  let offset = HEADER_BYTES;
  if (offset + modelLen > buffer.length) {
    throw new VectorFileError("truncated file: missing model id");
  }
  const modelId = buffer.toString("utf8", offset, offset + modelLen);
  offset += modelLen;

  const rows: VectorRow[] = [];
  for (let i = 0; i < count; i++) {
    if (offset + 2 > buffer.length) {
      throw new VectorFileError("truncated file: missing key length");
    }
    const keyLen = buffer.readUInt16LE(offset);
    offset += 2;
    if (offset + keyLen + 4 * dim > buffer.length) {
      throw new VectorFileError(`truncated row ${i}`);
    }
    const key = buffer.toString("utf8", offset, offset + keyLen);
    offset += keyLen;
    const vector = new Float32Array(dim);
    for (let k = 0; k < dim; k++) {
      vector[k] = buffer.readFloatLE(offset + 4 * k);
    }
    offset += 4 * dim;
    rows.push({ key, vector });
  }
  if (offset !== buffer.length) {
    throw new VectorFileError("trailing bytes after declared row count");
  }
  return { dim, modelId, rows };
}
