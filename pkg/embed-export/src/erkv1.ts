/**
 * ERKV1 embedding file format.
 *
 * Layout: the bytes "ERKV1\n", one JSON header line
 * {"dim":int,"count":int,"dtype":"f32le"} terminated by "\n", then per
 * record a little-endian u32 id length, the UTF-8 id bytes, and dim
 * little-endian f32 values.
 */

const MAGIC = "ERKV1\n";

export interface Erkv1Record {
  id: string;
  vector: Float32Array;
}

export function writeErkv1(records: Erkv1Record[], dim: number): Uint8Array {
  const encoder = new TextEncoder();
  const header = JSON.stringify({ count: records.length, dim, dtype: "f32le" });
  const parts: Uint8Array[] = [encoder.encode(MAGIC), encoder.encode(header + "\n")];

  for (const record of records) {
    if (record.vector.length !== dim) {
      throw new Error(
        `record ${record.id}: vector has ${record.vector.length} values, expected ${dim}`,
      );
    }
    const idBytes = encoder.encode(record.id);
    const buf = new ArrayBuffer(4 + idBytes.length + 4 * dim);
    const view = new DataView(buf);
    view.setUint32(0, idBytes.length, true);
    new Uint8Array(buf, 4, idBytes.length).set(idBytes);
    for (let k = 0; k < dim; k++) {
      view.setFloat32(4 + idBytes.length + 4 * k, record.vector[k], true);
    }
    parts.push(new Uint8Array(buf));
  }

  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

export interface Erkv1File {
  dim: number;
  records: Erkv1Record[];
}

/** Parse an ERKV1 blob; used for round-trip checks of the writer. */
export function readErkv1(data: Uint8Array): Erkv1File {
  const decoder = new TextDecoder("utf-8", { fatal: true });
  const magicBytes = new TextEncoder().encode(MAGIC);
  if (data.length < magicBytes.length ||
      !magicBytes.every((b, i) => data[i] === b)) {
    throw new Error("bad magic: not an ERKV1 file");
  }
  let headerEnd = -1;
  for (let i = magicBytes.length; i < data.length; i++) {
    if (data[i] === 0x0a) {
      headerEnd = i;
      break;
    }
  }
  if (headerEnd < 0) throw new Error("truncated: missing header line");
  const header = JSON.parse(decoder.decode(data.subarray(magicBytes.length, headerEnd)));
  const dim: number = header.dim;
  const count: number = header.count;
  if (!Number.isInteger(dim) || dim < 1 || !Number.isInteger(count) || count < 0) {
    throw new Error(`bad header: ${JSON.stringify(header)}`);
  }
  if (header.dtype !== "f32le") throw new Error(`unsupported dtype ${header.dtype}`);

  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const records: Erkv1Record[] = [];
  let offset = headerEnd + 1;
  for (let i = 0; i < count; i++) {
    if (offset + 4 > data.length) throw new Error(`truncated: record ${i} id length`);
    const idLen = view.getUint32(offset, true);
    offset += 4;
    if (offset + idLen > data.length) throw new Error(`truncated: record ${i} id bytes`);
    const id = decoder.decode(data.subarray(offset, offset + idLen));
    offset += idLen;
    if (offset + 4 * dim > data.length) {
      throw new Error(`truncated: record ${i} (${id}) expected ${dim} f32 values`);
    }
    const vector = new Float32Array(dim);
    for (let k = 0; k < dim; k++) {
      vector[k] = view.getFloat32(offset + 4 * k, true);
    }
    offset += 4 * dim;
    records.push({ id, vector });
  }
  return { dim, records };
}
