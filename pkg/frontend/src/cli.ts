#!/usr/bin/env node
/**
 * whitex-extract: embed an image directory or a caption file with a
 * pretrained dual-encoder model and write an NPY matrix plus manifest.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { createEncoder, DEFAULT_MODEL } from "./encoder.js";
import { extract } from "./extract.js";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("whitex-extract")
    .option("modality", {
      choices: ["image", "text"] as const,
      demandOption: true,
      describe: "embed images from a directory or captions from a text file",
    })
    .option("input", {
      type: "string",
      demandOption: true,
      describe: "image directory, or text file with one caption per line",
    })
    .option("model", {
      type: "string",
      default: DEFAULT_MODEL,
      describe: "model identifier, or stub:<dim> for the offline stub encoder",
    })
    .option("output", {
      type: "string",
      demandOption: true,
      describe: "output NPY path; manifest goes to <stem>.manifest.json",
    })
    .option("batch-size", {
      type: "number",
      default: 16,
    })
    .option("normalize", {
      type: "boolean",
      default: false,
      describe: "rescale embeddings to unit norm (raw outputs by default)",
    })
    .strict()
    .help()
    .parse();

  const encoder = await createEncoder(args.model, args.modality);
  const result = await extract(
    {
      modality: args.modality,
      input: args.input,
      output: args.output,
      batchSize: args["batch-size"],
      normalize: args.normalize,
    },
    encoder,
  );
  console.log(
    JSON.stringify({
      command: "extract",
      modality: args.modality,
      model: args.model,
      rows: result.rows,
      dim: result.dim,
      skipped: result.skipped,
      output: args.output,
      manifest: result.manifestPath,
    }),
  );
  return 0;
}

import { realpathSync } from "node:fs";
import { fileURLToPath } from "node:url";

const invokedDirectly = (() => {
  if (process.argv[1] === undefined) {
    return false;
  }
  try {
    return realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
  } catch {
    return false;
  }
})();

if (invokedDirectly) {
  main(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((err) => {
      console.error(JSON.stringify({ error: { message: String(err.message ?? err) } }));
      process.exit(1);
    });
}
