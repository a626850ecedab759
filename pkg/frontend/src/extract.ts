/**
 * Extraction jobs: run an encoder over an image directory or a caption
 * file and write the embeddings as a float32 NPY matrix plus a JSON
 * manifest recording the input behind every row (and every skip).
 */

import { readFile, readdir, stat, access, writeFile } from "node:fs/promises";
import { constants } from "node:fs";
import * as path from "node:path";

import type { Encoder } from "./encoder.js";
import { writeNpy } from "./npy.js";

export interface ExtractionJob {
  modality: "image" | "text";
  /** Directory of images, or a text file with one caption per line. */
  input: string;
  output: string;
  batchSize: number;
  /** Rescale each row to unit norm before writing (off by default). */
  normalize: boolean;
}

export interface ManifestEntry {
  input: string;
  row: number | null;
  status: "ok" | "skipped";
  reason?: string;
}

export interface ExtractionResult {
  rows: number;
  dim: number;
  skipped: number;
  manifest: ManifestEntry[];
  manifestPath: string;
}

const IMAGE_EXTENSIONS = new Set([".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"]);

interface Candidate {
  /** Identifier recorded in the manifest (filename or line number). */
  id: string;
  /** Payload handed to the encoder (file path or caption text). */
  value: string;
  /** Set when the input was rejected before encoding. */
  skipReason?: string;
}

async function listTextCandidates(input: string): Promise<Candidate[]> {
  const lines = (await readFile(input, "utf8")).split(/\r?\n/);
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop(); // trailing newline, not an empty caption
  }
  return lines.map((line, index) => {
    const candidate: Candidate = { id: `line ${index + 1}`, value: line };
    if (line.trim().length === 0) {
      candidate.skipReason = "empty caption";
    }
    return candidate;
  });
}

async function listImageCandidates(input: string): Promise<Candidate[]> {
  const names = (await readdir(input)).sort();
  const candidates: Candidate[] = [];
  for (const name of names) {
    if (!IMAGE_EXTENSIONS.has(path.extname(name).toLowerCase())) {
      continue;
    }
    const full = path.join(input, name);
    const candidate: Candidate = { id: name, value: full };
    try {
      const info = await stat(full);
      if (!info.isFile()) {
        throw new Error("not a regular file");
      }
      await access(full, constants.R_OK);
    } catch (err) {
      console.warn(`warning: skipping ${name}: ${(err as Error).message}`);
      candidate.skipReason = `unreadable: ${(err as Error).message}`;
    }
    candidates.push(candidate);
  }
  return candidates;
}

async function encodeBatch(
  encoder: Encoder,
  modality: "image" | "text",
  batch: Candidate[],
): Promise<Map<string, Float32Array>> {
  const encode = (items: string[]) =>
    modality === "text" ? encoder.encodeText(items) : encoder.encodeImages(items);
  const vectors = new Map<string, Float32Array>();
  try {
    const rows = await encode(batch.map((c) => c.value));
    batch.forEach((c, i) => vectors.set(c.id, rows[i]));
  } catch {
    // isolate the failing item(s) so one bad input costs one row, not a batch
    for (const candidate of batch) {
      try {
        const [row] = await encode([candidate.value]);
        vectors.set(candidate.id, row);
      } catch (err) {
        console.warn(
          `warning: skipping ${candidate.id}: ${(err as Error).message}`,
        );
        candidate.skipReason = `encode failed: ${(err as Error).message}`;
      }
    }
  }
  return vectors;
}

export function manifestPathFor(output: string): string {
  const parsed = path.parse(output);
  return path.join(parsed.dir, `${parsed.name}.manifest.json`);
}

export async function extract(
  job: ExtractionJob,
  encoder: Encoder,
): Promise<ExtractionResult> {
  if (job.batchSize < 1) {
    throw new Error(`batch size must be >= 1, got ${job.batchSize}`);
  }
  const candidates =
    job.modality === "text"
      ? await listTextCandidates(job.input)
      : await listImageCandidates(job.input);

  const vectors = new Map<string, Float32Array>();
  const pending = candidates.filter((c) => c.skipReason === undefined);
  for (let start = 0; start < pending.length; start += job.batchSize) {
    const batch = pending.slice(start, start + job.batchSize);
    const encoded = await encodeBatch(encoder, job.modality, batch);
    encoded.forEach((vec, id) => vectors.set(id, vec));
  }

  const kept = candidates.filter((c) => vectors.has(c.id));
  if (kept.length === 0) {
    throw new Error(`no inputs could be embedded from ${job.input}`);
  }
  const dim = vectors.get(kept[0].id)!.length;

  const data = new Float32Array(kept.length * dim);
  kept.forEach((candidate, row) => {
    let vec = vectors.get(candidate.id)!;
    if (vec.length !== dim) {
      throw new Error(
        `inconsistent embedding width: ${vec.length} vs ${dim} for ${candidate.id}`,
      );
    }
    if (job.normalize) {
      let sumSq = 0;
      for (const v of vec) sumSq += v * v;
      const norm = Math.sqrt(sumSq);
      if (norm === 0) {
        throw new Error(`zero embedding for ${candidate.id}; cannot normalize`);
      }
      vec = vec.map((v) => v / norm);
    }
    data.set(vec, row * dim);
  });

  await writeNpy(job.output, { rows: kept.length, cols: dim, data });

  // one manifest entry per input, in input order: either its row index
  // in the matrix or an explicit skip record
  let nextRow = 0;
  const manifest: ManifestEntry[] = candidates.map((candidate) => {
    if (vectors.has(candidate.id)) {
      return { input: candidate.id, row: nextRow++, status: "ok" as const };
    }
    return {
      input: candidate.id,
      row: null,
      status: "skipped" as const,
      reason: candidate.skipReason ?? "unknown",
    };
  });
  const manifestPath = manifestPathFor(job.output);
  await writeFile(manifestPath, JSON.stringify(manifest, null, 2) + "\n");

  return {
    rows: kept.length,
    dim,
    skipped: manifest.filter((e) => e.status === "skipped").length,
    manifest,
    manifestPath,
  };
}
