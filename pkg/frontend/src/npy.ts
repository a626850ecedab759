/**
 * Minimal NPY v1.0 writer (and reader, used by the tests).
 *
 * Emits little-endian float32 matrices in C order: magic \x93NUMPY,
 * version bytes 01 00, a space-padded header dict, then the raw data.
 * The header is padded so that magic + version + length + header is a
 * multiple of 64 bytes and ends with a newline, matching the format
 * expected by downstream NPY readers.
 */

const MAGIC = Buffer.from([0x93, 0x4e, 0x55, 0x4d, 0x50, 0x59]); // \x93NUMPY

export interface NpyMatrix {
  rows: number;
  cols: number;
  /** Row-major values, rows * cols entries. */
  data: Float32Array;
}

export function encodeNpy(matrix: NpyMatrix): Buffer {
  const { rows, cols, data } = matrix;
  if (data.length !== rows * cols) {
    throw new Error(
      `data length ${data.length} does not match shape (${rows}, ${cols})`,
    );
  }
  const headerText = `{'descr': '<f4', 'fortran_order': False, 'shape': (${rows}, ${cols}), }`;
  const unpadded = MAGIC.length + 2 + 2 + headerText.length + 1; // +1 for \n
  const padding = (64 - (unpadded % 64)) % 64;
  const header = Buffer.from(headerText + " ".repeat(padding) + "\n", "latin1");

  const prefix = Buffer.alloc(MAGIC.length + 4);
  MAGIC.copy(prefix, 0);
  prefix[6] = 1; // major version
  prefix[7] = 0; // minor version
  prefix.writeUInt16LE(header.length, 8);

  const payload = Buffer.alloc(data.length * 4);
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  for (let i = 0; i < data.length; i++) {
    view.setFloat32(i * 4, data[i], true);
  }
  return Buffer.concat([prefix, header, payload]);
}

export async function writeNpy(path: string, matrix: NpyMatrix): Promise<void> {
  const { writeFile } = await import("node:fs/promises");
  await writeFile(path, encodeNpy(matrix));
}

export function decodeNpy(buffer: Buffer): NpyMatrix {
  if (!buffer.subarray(0, 6).equals(MAGIC)) {
    throw new Error("not an NPY file: bad magic");
  }
  if (buffer[6] !== 1 || buffer[7] !== 0) {
    throw new Error(`unsupported NPY version ${buffer[6]}.${buffer[7]}`);
  }
  const headerLength = buffer.readUInt16LE(8);
  const header = buffer.subarray(10, 10 + headerLength).toString("latin1");
  const descr = header.match(/'descr':\s*'([^']+)'/)?.[1];
  if (descr !== "<f4") {
    throw new Error(`unsupported dtype ${descr}; expected '<f4'`);
  }
  if (!/'fortran_order':\s*False/.test(header)) {
    throw new Error("fortran-order arrays are not supported");
  }
  const shape = header.match(/'shape':\s*\(([^)]*)\)/)?.[1];
  if (shape === undefined) {
    throw new Error("malformed NPY header: missing shape");
  }
  const dims = shape
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map(Number);
  if (dims.length !== 2 || dims.some((d) => !Number.isInteger(d) || d < 0)) {
    throw new Error(`expected a 2-D shape, got (${shape})`);
  }
  const [rows, cols] = dims;
  const start = 10 + headerLength;
  const expected = rows * cols * 4;
  const payload = buffer.subarray(start, start + expected);
  if (payload.length !== expected) {
    throw new Error(
      `NPY payload truncated: expected ${expected} bytes, got ${payload.length}`,
    );
  }
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  const data = new Float32Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = view.getFloat32(i * 4, true);
  }
  return { rows, cols, data };
}
