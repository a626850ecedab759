/**
 * Embedding encoders.
 *
 * The production path wraps a pretrained dual-encoder vision-language
 * model via transformers.js; raw projection outputs are returned without
 * unit normalization so the downstream whitening sees the original
 * embedding geometry. A deterministic stub encoder ("stub:<dim>") backs
 * the tests and offline pipeline dry-runs.
 */

export interface Encoder {
  readonly dim: number;
  encodeText(captions: string[]): Promise<Float32Array[]>;
  encodeImages(paths: string[]): Promise<Float32Array[]>;
}

export const DEFAULT_MODEL = "Xenova/clip-vit-large-patch14";

/** FNV-1a 32-bit hash, the seed source for the stub encoder. */
function fnv1a(bytes: Uint8Array): number {
  let hash = 0x811c9dc5;
  for (const byte of bytes) {
    hash ^= byte;
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

/** mulberry32: tiny deterministic PRNG over a 32-bit seed. */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Deterministic content-hash encoder. Same input bytes always map to the
 * same vector; different inputs decorrelate. No model download needed.
 */
export class StubEncoder implements Encoder {
  constructor(readonly dim: number = 32) {}

  private vectorFor(bytes: Uint8Array): Float32Array {
    const next = mulberry32(fnv1a(bytes));
    const out = new Float32Array(this.dim);
    for (let i = 0; i < this.dim; i += 2) {
      // Box-Muller keeps the stub roughly Gaussian like real embeddings
      const u = Math.max(next(), 1e-12);
      const v = next();
      const radius = Math.sqrt(-2.0 * Math.log(u));
      out[i] = Math.fround(radius * Math.cos(2 * Math.PI * v));
      if (i + 1 < this.dim) {
        out[i + 1] = Math.fround(radius * Math.sin(2 * Math.PI * v));
      }
    }
    return out;
  }

  async encodeText(captions: string[]): Promise<Float32Array[]> {
    return captions.map((c) => this.vectorFor(new TextEncoder().encode(c)));
  }

  async encodeImages(paths: string[]): Promise<Float32Array[]> {
    const { readFile } = await import("node:fs/promises");
    const out: Float32Array[] = [];
    for (const path of paths) {
      out.push(this.vectorFor(await readFile(path)));
    }
    return out;
  }
}

/** Dual-encoder inference through transformers.js. */
export class TransformersEncoder implements Encoder {
  private constructor(
    readonly dim: number,
    private readonly modality: "text" | "image",
    private readonly tokenizer: any,
    private readonly textModel: any,
    private readonly processor: any,
    private readonly visionModel: any,
    private readonly rawImage: any,
  ) {}

  static async load(
    modelId: string,
    modality: "text" | "image",
  ): Promise<TransformersEncoder> {
    // resolved at runtime so the package builds without the optional
    // model runtime installed; loading then fails with a clear error
    const specifier = "@xenova/transformers";
    let transformers: any;
    try {
      transformers = await import(specifier);
    } catch (err) {
      throw new Error(
        `transformers.js is not installed; cannot load model ${modelId} ` +
          `(${(err as Error).message})`,
      );
    }
    const { env } = transformers;
    env.allowLocalModels = true;

    let tokenizer = null;
    let textModel = null;
    let processor = null;
    let visionModel = null;
    let dim: number;
    if (modality === "text") {
      tokenizer = await transformers.AutoTokenizer.from_pretrained(modelId);
      textModel = await transformers.CLIPTextModelWithProjection.from_pretrained(
        modelId,
        { quantized: true },
      );
      dim = textModel.config.projection_dim;
    } else {
      processor = await transformers.AutoProcessor.from_pretrained(modelId);
      visionModel = await transformers.CLIPVisionModelWithProjection.from_pretrained(
        modelId,
        { quantized: true },
      );
      dim = visionModel.config.projection_dim;
    }
    return new TransformersEncoder(
      dim,
      modality,
      tokenizer,
      textModel,
      processor,
      visionModel,
      transformers.RawImage,
    );
  }

  async encodeText(captions: string[]): Promise<Float32Array[]> {
    if (this.modality !== "text") {
      throw new Error("encoder was loaded for image inputs");
    }
    const tokens = this.tokenizer(captions, { padding: true, truncation: true });
    const { text_embeds } = await this.textModel(tokens);
    return this.splitRows(text_embeds, captions.length);
  }

  async encodeImages(paths: string[]): Promise<Float32Array[]> {
    if (this.modality !== "image") {
      throw new Error("encoder was loaded for text inputs");
    }
    const images = [];
    for (const path of paths) {
      images.push(await this.rawImage.read(path));
    }
    const inputs = await this.processor(images);
    const { image_embeds } = await this.visionModel(inputs);
    return this.splitRows(image_embeds, paths.length);
  }

  private splitRows(tensor: any, count: number): Float32Array[] {
    const flat = Float32Array.from(tensor.data as ArrayLike<number>);
    const width = flat.length / count;
    if (!Number.isInteger(width)) {
      throw new Error(
        `model output length ${flat.length} not divisible by batch ${count}`,
      );
    }
    const rows: Float32Array[] = [];
    for (let i = 0; i < count; i++) {
      rows.push(flat.slice(i * width, (i + 1) * width));
    }
    return rows;
  }
}

/**
 * Resolve a model identifier to an encoder. "stub" or "stub:<dim>" gives
 * the deterministic offline encoder; anything else loads transformers.js.
 */
export async function createEncoder(
  modelId: string,
  modality: "text" | "image",
): Promise<Encoder> {
  if (modelId === "stub" || modelId.startsWith("stub:")) {
    const dim = modelId.includes(":") ? Number(modelId.split(":")[1]) : 32;
    if (!Number.isInteger(dim) || dim < 1) {
      throw new Error(`invalid stub dimension in ${modelId}`);
    }
    return new StubEncoder(dim);
  }
  return TransformersEncoder.load(modelId, modality);
}
