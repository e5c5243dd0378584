/**
 * Deterministic hashing sentence encoder.
 *
 * Model ids name the family and its parameters: `hash-ngram-v1:d<dim>:s<seed>`.
 * Token 1/2/3-grams of the lowercased text are FNV-1a hashed together with the
 * seed; each gram adds +1 or -1 to one of `dim` accumulator slots, and the
 * integer accumulator is L2-normalized into a float32 unit vector.
 *
 * Every intermediate value before the final division is an exactly
 * representable integer, so the output is bit-identical across runs, machines,
 * and independent implementations of the same recipe.
 */

const MODEL_RE = /^hash-ngram-v1:d([1-9][0-9]*):s(0|[1-9][0-9]*)$/;
const TOKEN_RE = /[a-z0-9]+/g;

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

/** The encoder named by a model id could not be constructed. */
export class ModelError extends Error {}

/** 32-bit FNV-1a hash of a byte sequence, returned unsigned. */
export function fnv1a32(bytes: Uint8Array): number {
  let h = FNV_OFFSET | 0;
  for (const byte of bytes) {
    h ^= byte;
    h = Math.imul(h, FNV_PRIME);
  }
  return h >>> 0;
}

export class HashNgramEncoder {
  readonly dim: number;
  readonly seed: number;
  readonly modelId: string;
  private readonly prefix: Uint8Array;
  private readonly textEncoder = new TextEncoder();

  constructor(dim: number, seed: number) {
    if (!Number.isInteger(dim) || dim <= 0) {
      throw new ModelError(`dim must be a positive integer, got ${dim}`);
    }
    if (!Number.isInteger(seed) || seed < 0) {
      throw new ModelError(`seed must be a non-negative integer, got ${seed}`);
    }
    this.dim = dim;
    this.seed = seed;
    this.modelId = `hash-ngram-v1:d${dim}:s${seed}`;
    this.prefix = this.textEncoder.encode(`${seed}\x1f`);
  }

  /** Parse a model id; anything outside the supported family fails to load. */
  static fromModelId(modelId: string): HashNgramEncoder {
    const match = MODEL_RE.exec(modelId);
    if (!match) {
      throw new ModelError(
        `cannot load model ${JSON.stringify(modelId)}: expected hash-ngram-v1:d<dim>:s<seed>`,
      );
    }
    return new HashNgramEncoder(Number(match[1]), Number(match[2]));
  }

  /**
   * Unit vector for `text`, or null when no token survives (the caller flags
   * such rows instead of writing them).
   */
  embed(text: string): Float32Array | null {
    const tokens = text.toLowerCase().match(TOKEN_RE) ?? [];
    const acc = new Float64Array(this.dim);
    for (let n = 1; n <= 3; n++) {
      for (let i = 0; i + n <= tokens.length; i++) {
        const gram = this.textEncoder.encode(tokens.slice(i, i + n).join(" "));
        const data = new Uint8Array(this.prefix.length + gram.length);
        data.set(this.prefix, 0);
        data.set(gram, this.prefix.length);
        const h = fnv1a32(data);
        acc[h % this.dim]! += ((h >>> 16) & 1) === 0 ? 1 : -1;
      }
    }
    let sumSquares = 0;
    for (let k = 0; k < this.dim; k++) {
      sumSquares += acc[k]! * acc[k]!;
    }
    if (sumSquares === 0) {
      return null;
    }
    const norm = Math.sqrt(sumSquares);
    const out = new Float32Array(this.dim);
    for (let k = 0; k < this.dim; k++) {
      out[k] = acc[k]! / norm;
    }
    return out;
  }
}
