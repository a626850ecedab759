import { mkdtemp, readFile, writeFile, mkdir, chmod } from "node:fs/promises";
import { tmpdir } from "node:os";
import * as path from "node:path";

import { beforeEach, describe, expect, it, vi } from "vitest";

import { StubEncoder, createEncoder, type Encoder } from "../src/encoder.js";
import { extract, manifestPathFor, type ManifestEntry } from "../src/extract.js";
import { decodeNpy } from "../src/npy.js";

let workdir: string;

beforeEach(async () => {
  workdir = await mkdtemp(path.join(tmpdir(), "extract-"));
  vi.spyOn(console, "warn").mockImplementation(() => {});
});

async function readManifest(output: string): Promise<ManifestEntry[]> {
  return JSON.parse(await readFile(manifestPathFor(output), "utf8"));
}

function rowOf(decoded: { cols: number; data: Float32Array }, row: number) {
  return [...decoded.data.slice(row * decoded.cols, (row + 1) * decoded.cols)];
}

describe("text extraction", () => {
  it("writes one row per caption in line order", async () => {
    const input = path.join(workdir, "captions.txt");
    await writeFile(input, "a dog\na cat\na bus\n");
    const output = path.join(workdir, "text.npy");
    const encoder = new StubEncoder(16);

    const result = await extract(
      { modality: "text", input, output, batchSize: 2, normalize: false },
      encoder,
    );
    expect(result.rows).toBe(3);
    expect(result.dim).toBe(16);

    const decoded = decodeNpy(await readFile(output));
    expect(decoded.rows).toBe(3);
    const direct = await encoder.encodeText(["a dog", "a cat", "a bus"]);
    expect(rowOf(decoded, 0)).toEqual([...direct[0]]);
    expect(rowOf(decoded, 2)).toEqual([...direct[2]]);
  });

  it("skips empty caption lines and records them in place", async () => {
    const input = path.join(workdir, "captions.txt");
    await writeFile(input, "first\n\n   \nlast\n");
    const output = path.join(workdir, "text.npy");

    const result = await extract(
      { modality: "text", input, output, batchSize: 8, normalize: false },
      new StubEncoder(8),
    );
    expect(result.rows).toBe(2);
    expect(result.skipped).toBe(2);

    const manifest = await readManifest(output);
    expect(manifest.map((e) => e.status)).toEqual(["ok", "skipped", "skipped", "ok"]);
    expect(manifest[0]).toMatchObject({ input: "line 1", row: 0 });
    expect(manifest[1]).toMatchObject({ reason: "empty caption", row: null });
    expect(manifest[3]).toMatchObject({ input: "line 4", row: 1 });
  });

  it("is deterministic: identical captions give identical rows", async () => {
    const input = path.join(workdir, "captions.txt");
    await writeFile(input, "same caption\nsame caption\n");
    const output = path.join(workdir, "text.npy");

    await extract(
      { modality: "text", input, output, batchSize: 1, normalize: false },
      new StubEncoder(32),
    );
    const decoded = decodeNpy(await readFile(output));
    expect(rowOf(decoded, 0)).toEqual(rowOf(decoded, 1));
  });

  it("normalize rescales rows to unit norm", async () => {
    const input = path.join(workdir, "captions.txt");
    await writeFile(input, "something\n");
    const output = path.join(workdir, "text.npy");

    await extract(
      { modality: "text", input, output, batchSize: 4, normalize: true },
      new StubEncoder(64),
    );
    const decoded = decodeNpy(await readFile(output));
    const norm = Math.sqrt(rowOf(decoded, 0).reduce((s, v) => s + v * v, 0));
    expect(norm).toBeCloseTo(1.0, 5);
  });

  it("respects the batch size", async () => {
    const input = path.join(workdir, "captions.txt");
    await writeFile(input, Array.from({ length: 10 }, (_, i) => `cap ${i}`).join("\n"));
    const output = path.join(workdir, "text.npy");

    const batches: number[] = [];
    const inner = new StubEncoder(4);
    const counting: Encoder = {
      dim: 4,
      async encodeText(captions) {
        batches.push(captions.length);
        return inner.encodeText(captions);
      },
      async encodeImages(paths) {
        return inner.encodeImages(paths);
      },
    };
    await extract(
      { modality: "text", input, output, batchSize: 4, normalize: false },
      counting,
    );
    expect(batches).toEqual([4, 4, 2]);
  });
});

describe("image extraction", () => {
  it("embeds files in sorted filename order", async () => {
    const imgdir = path.join(workdir, "imgs");
    await mkdir(imgdir);
    await writeFile(path.join(imgdir, "b.png"), Buffer.from([2, 2, 2]));
    await writeFile(path.join(imgdir, "a.png"), Buffer.from([1, 1, 1]));
    await writeFile(path.join(imgdir, "notes.txt"), "not an image");
    const output = path.join(workdir, "img.npy");

    const encoder = new StubEncoder(8);
    const result = await extract(
      { modality: "image", input: imgdir, output, batchSize: 16, normalize: false },
      encoder,
    );
    expect(result.rows).toBe(2);

    const manifest = await readManifest(output);
    expect(manifest.map((e) => e.input)).toEqual(["a.png", "b.png"]);

    const decoded = decodeNpy(await readFile(output));
    const direct = await encoder.encodeImages([
      path.join(imgdir, "a.png"),
      path.join(imgdir, "b.png"),
    ]);
    expect(rowOf(decoded, 0)).toEqual([...direct[0]]);
    expect(rowOf(decoded, 1)).toEqual([...direct[1]]);
  });

  it("identical image bytes give identical rows", async () => {
    const imgdir = path.join(workdir, "imgs");
    await mkdir(imgdir);
    await writeFile(path.join(imgdir, "x.png"), Buffer.from([9, 9]));
    await writeFile(path.join(imgdir, "y.png"), Buffer.from([9, 9]));
    const output = path.join(workdir, "img.npy");

    await extract(
      { modality: "image", input: imgdir, output, batchSize: 2, normalize: false },
      new StubEncoder(16),
    );
    const decoded = decodeNpy(await readFile(output));
    expect(rowOf(decoded, 0)).toEqual(rowOf(decoded, 1));
  });

  it("records unreadable files as skipped and keeps going", async () => {
    const imgdir = path.join(workdir, "imgs");
    await mkdir(imgdir);
    await writeFile(path.join(imgdir, "good.png"), Buffer.from([1]));
    await mkdir(path.join(imgdir, "broken.png")); // directory, not a file
    const output = path.join(workdir, "img.npy");

    const result = await extract(
      { modality: "image", input: imgdir, output, batchSize: 4, normalize: false },
      new StubEncoder(8),
    );
    expect(result.rows).toBe(1);
    expect(result.skipped).toBe(1);
    const manifest = await readManifest(output);
    const broken = manifest.find((e) => e.input === "broken.png");
    expect(broken).toMatchObject({ status: "skipped", row: null });
    expect(broken?.reason).toMatch(/unreadable/);
    expect(console.warn).toHaveBeenCalled();
  });

  it("isolates per-item encode failures inside a batch", async () => {
    const imgdir = path.join(workdir, "imgs");
    await mkdir(imgdir);
    await writeFile(path.join(imgdir, "a.png"), Buffer.from([1]));
    await writeFile(path.join(imgdir, "b.png"), Buffer.from([2]));
    const output = path.join(workdir, "img.npy");

    const inner = new StubEncoder(8);
    const flaky: Encoder = {
      dim: 8,
      async encodeText(captions) {
        return inner.encodeText(captions);
      },
      async encodeImages(paths) {
        if (paths.some((p) => p.endsWith("a.png"))) {
          throw new Error("corrupt image data");
        }
        return inner.encodeImages(paths);
      },
    };
    const result = await extract(
      { modality: "image", input: imgdir, output, batchSize: 2, normalize: false },
      flaky,
    );
    expect(result.rows).toBe(1);
    const manifest = await readManifest(output);
    expect(manifest.find((e) => e.input === "a.png")).toMatchObject({
      status: "skipped",
    });
    expect(manifest.find((e) => e.input === "b.png")).toMatchObject({
      status: "ok",
      row: 0,
    });
  });

  it("fails when nothing can be embedded", async () => {
    const imgdir = path.join(workdir, "imgs");
    await mkdir(imgdir);
    const output = path.join(workdir, "img.npy");
    await expect(
      extract(
        { modality: "image", input: imgdir, output, batchSize: 2, normalize: false },
        new StubEncoder(4),
      ),
    ).rejects.toThrow(/no inputs/);
  });
});

describe("createEncoder", () => {
  it("builds stub encoders with a configurable width", async () => {
    const encoder = await createEncoder("stub:24", "text");
    expect(encoder.dim).toBe(24);
    const [vec] = await encoder.encodeText(["hello"]);
    expect(vec.length).toBe(24);
  });

  it("rejects malformed stub dimensions", async () => {
    await expect(createEncoder("stub:zero", "text")).rejects.toThrow(/stub/);
  });
});
