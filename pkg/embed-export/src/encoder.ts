/**
 * Text encoders producing one fixed-dimension vector per input.
 *
 * The transformer encoder loads a feature-extraction pipeline lazily so
 * the package works (and tests run) without the optional
 * @huggingface/transformers dependency or any downloaded weights. The
 * hash encoder gives deterministic pseudo-embeddings for pipeline smoke
 * tests on machines without model access.
 */

export class ModelUnavailable extends Error {}

export class TokenizationFailure extends Error {
  constructor(public postId: string, cause: unknown) {
    super(`post ${postId}: ${String(cause)}`);
  }
}

export interface Encoder {
  /** Model identity recorded in the sidecar metadata. */
  readonly name: string;
  readonly revision: string;
  readonly dim: number;
  encode(texts: string[]): Promise<Float32Array[]>;
}

export interface TransformerOptions {
  model: string;
  revision: string;
  pooling: "mean" | "first-token";
  maxLength: number;
}

export const DEFAULT_MODEL = "mental/mental-roberta-base";
export const DEFAULT_DIM = 768;

export async function loadTransformerEncoder(
  options: TransformerOptions,
): Promise<Encoder> {
  let transformers: any;
  try {
    transformers = await import("@huggingface/transformers");
  } catch (err) {
    throw new ModelUnavailable(
      `@huggingface/transformers is not installed (${(err as Error).message})`,
    );
  }
  let extractor: any;
  try {
    extractor = await transformers.pipeline("feature-extraction", options.model, {
      revision: options.revision,
    });
  } catch (err) {
    throw new ModelUnavailable(
      `could not load ${options.model}@${options.revision}: ${(err as Error).message}`,
    );
  }
  const pooling = options.pooling === "first-token" ? "cls" : "mean";
  const run = async (text: string): Promise<Float32Array> => {
    const result = await extractor(text, {
      pooling,
      normalize: false,
      truncation: true,
      max_length: options.maxLength,
    });
    return Float32Array.from(result.data as Iterable<number>);
  };

  // Probe the hidden size instead of trusting a constant, so non-default
  // models export with their true dimension.
  const probe = await run("");

  return {
    name: options.model,
    revision: options.revision,
    dim: probe.length,
    async encode(texts: string[]): Promise<Float32Array[]> {
      const out: Float32Array[] = [];
      for (const text of texts) {
        out.push(await run(text));
      }
      return out;
    },
  };
}

/** FNV-1a of a UTF-8 string, 32-bit. */
function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  const bytes = new TextEncoder().encode(text);
  for (const b of bytes) {
    hash ^= b;
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

function xorshift32(state: number): number {
  state ^= state << 13;
  state >>>= 0;
  state ^= state >>> 17;
  state ^= state << 5;
  return state >>> 0;
}

/**
 * Deterministic stand-in encoder: each text hashes to a seed that drives
 * a xorshift stream of values in [-1, 1]. Identical input bytes always
 * produce identical vectors, on any platform.
 */
export function hashEncoder(dim: number = DEFAULT_DIM): Encoder {
  return {
    name: "hash",
    revision: "xorshift32-v1",
    dim,
    async encode(texts: string[]): Promise<Float32Array[]> {
      return texts.map((text) => {
        let state = fnv1a(text) || 0x9e3779b9;
        const vec = new Float32Array(dim);
        for (let k = 0; k < dim; k++) {
          state = xorshift32(state);
          vec[k] = (state / 0xffffffff) * 2 - 1;
        }
        return vec;
      });
    },
  };
}
