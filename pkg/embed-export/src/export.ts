/**
 * Corpus-to-ERKV1 export: encode every post in corpus order and emit the
 * binary file plus a sidecar metadata JSON describing how the vectors
 * were produced.
 */

import { CorpusPost, parseCorpusJsonl } from "./corpus.js";
import { Encoder, TokenizationFailure } from "./encoder.js";
import { Erkv1Record, writeErkv1 } from "./erkv1.js";

export interface ExportConfig {
  pooling: "mean" | "first-token";
  batchSize: number;
  maxLength: number;
}

export const DEFAULT_EXPORT_CONFIG: ExportConfig = {
  pooling: "mean",
  batchSize: 16,
  maxLength: 512,
};

export interface ExportResult {
  erkv1: Uint8Array;
  metadata: {
    model: string;
    revision: string;
    pooling: string;
    max_len: number;
    dim: number;
    count: number;
  };
}

export async function exportEmbeddings(
  corpusContent: string,
  encoder: Encoder,
  config: ExportConfig = DEFAULT_EXPORT_CONFIG,
): Promise<ExportResult> {
  const posts = parseCorpusJsonl(corpusContent);
  const records: Erkv1Record[] = [];

  for (let start = 0; start < posts.length; start += config.batchSize) {
    const batch = posts.slice(start, start + config.batchSize);
    const vectors = await encodeBatch(encoder, batch);
    for (let i = 0; i < batch.length; i++) {
      const vector = vectors[i];
      if (vector.length !== encoder.dim) {
        throw new TokenizationFailure(
          batch[i].postId,
          `encoder returned ${vector.length} values, expected ${encoder.dim}`,
        );
      }
      for (const value of vector) {
        if (!Number.isFinite(value)) {
          throw new TokenizationFailure(batch[i].postId, "non-finite value in embedding");
        }
      }
      records.push({ id: batch[i].postId, vector });
    }
  }

  return {
    erkv1: writeErkv1(records, encoder.dim),
    metadata: {
      model: encoder.name,
      revision: encoder.revision,
      pooling: config.pooling,
      max_len: config.maxLength,
      dim: encoder.dim,
      count: records.length,
    },
  };
}

async function encodeBatch(encoder: Encoder, batch: CorpusPost[]): Promise<Float32Array[]> {
  try {
    return await encoder.encode(batch.map((p) => p.text));
  } catch (err) {
    // Retry one by one so the failing post is identified.
    const out: Float32Array[] = [];
    for (const post of batch) {
      try {
        out.push((await encoder.encode([post.text]))[0]);
      } catch (inner) {
        throw new TokenizationFailure(post.postId, inner);
      }
    }
    return out;
  }
}
