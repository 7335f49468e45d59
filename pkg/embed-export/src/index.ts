export { parseCorpusJsonl, type CorpusPost } from "./corpus.js";
export {
  DEFAULT_DIM,
  DEFAULT_MODEL,
  ModelUnavailable,
  TokenizationFailure,
  hashEncoder,
  loadTransformerEncoder,
  type Encoder,
  type TransformerOptions,
} from "./encoder.js";
export { readErkv1, writeErkv1, type Erkv1File, type Erkv1Record } from "./erkv1.js";
export {
  DEFAULT_EXPORT_CONFIG,
  exportEmbeddings,
  type ExportConfig,
  type ExportResult,
} from "./export.js";
