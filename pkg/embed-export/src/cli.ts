#!/usr/bin/env node
/**
 * embed-export --corpus corpus.jsonl --out posts.erkv1
 *              [--model ID] [--revision REV] [--pooling mean|first-token]
 *              [--batch-size N] [--max-length N] [--encoder transformer|hash]
 *
 * Writes the ERKV1 file and a sidecar <out>.meta.json. The hash encoder
 * produces deterministic pseudo-embeddings for pipeline tests on
 * machines without model access.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { exit } from "node:process";

import {
  DEFAULT_MODEL,
  Encoder,
  ModelUnavailable,
  hashEncoder,
  loadTransformerEncoder,
} from "./encoder.js";
import { DEFAULT_EXPORT_CONFIG, exportEmbeddings } from "./export.js";

interface CliArgs {
  corpus: string;
  out: string;
  model: string;
  revision: string;
  pooling: "mean" | "first-token";
  batchSize: number;
  maxLength: number;
  encoder: "transformer" | "hash";
}

function parseArgs(argv: string[]): CliArgs {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`usage error near ${key}`);
    }
    args[key.slice(2)] = value;
  }
  if (!args.corpus || !args.out) {
    throw new Error("required: --corpus <jsonl> --out <erkv1>");
  }
  const pooling = (args.pooling ?? "mean") as CliArgs["pooling"];
  if (pooling !== "mean" && pooling !== "first-token") {
    throw new Error(`unknown pooling ${pooling}`);
  }
  const encoder = (args.encoder ?? "transformer") as CliArgs["encoder"];
  if (encoder !== "transformer" && encoder !== "hash") {
    throw new Error(`unknown encoder ${encoder}`);
  }
  return {
    corpus: args.corpus,
    out: args.out,
    model: args.model ?? DEFAULT_MODEL,
    revision: args.revision ?? "main",
    pooling,
    batchSize: Number(args["batch-size"] ?? DEFAULT_EXPORT_CONFIG.batchSize),
    maxLength: Number(args["max-length"] ?? DEFAULT_EXPORT_CONFIG.maxLength),
    encoder,
  };
}

async function main(): Promise<void> {
  let cli: CliArgs;
  try {
    cli = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(String((err as Error).message));
    exit(1);
  }

  let encoder: Encoder;
  if (cli.encoder === "hash") {
    encoder = hashEncoder();
  } else {
    try {
      encoder = await loadTransformerEncoder({
        model: cli.model,
        revision: cli.revision,
        pooling: cli.pooling,
        maxLength: cli.maxLength,
      });
    } catch (err) {
      if (err instanceof ModelUnavailable) {
        console.error(`model unavailable: ${err.message}`);
        exit(2);
      }
      throw err;
    }
  }

  const corpus = readFileSync(cli.corpus, "utf-8");
  const result = await exportEmbeddings(corpus, encoder, {
    pooling: cli.pooling,
    batchSize: cli.batchSize,
    maxLength: cli.maxLength,
  });
  writeFileSync(cli.out, result.erkv1);
  writeFileSync(`${cli.out}.meta.json`, JSON.stringify(result.metadata, null, 2) + "\n");
  console.log(
    `wrote ${result.metadata.count} vectors (dim ${result.metadata.dim}) to ${cli.out}`,
  );
}

main().catch((err) => {
  console.error(String(err));
  exit(2);
});
