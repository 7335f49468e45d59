// Optional peer dependency: typed as any so the package compiles and
// tests run without it installed. The import stays behind a try/catch.
declare module "@huggingface/transformers";
