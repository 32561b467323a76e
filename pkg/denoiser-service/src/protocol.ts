/**
 * Binary stdio bridge protocol shared with the reconstruction package.
 *
 * All integers and floats are little-endian.
 *
 * Request frame:  magic "RSMD" (4) | u8 version = 1 | u32 rows | u32 cols |
 *                 f64 variance | rows*cols float64 payload.
 * Response frame: magic "RSMD" (4) | u8 status | u32 rows | u32 cols |
 *                 payload (status 0) or u32 message-length + UTF-8 message
 *                 (status 1).
 */

export const MAGIC = Buffer.from("RSMD", "ascii");
export const PROTOCOL_VERSION = 1;
export const REQUEST_HEADER_SIZE = 4 + 1 + 4 + 4 + 8;
export const RESPONSE_HEADER_SIZE = 4 + 1 + 4 + 4;

export interface RequestHeader {
  magicOk: boolean;
  version: number;
  rows: number;
  cols: number;
  variance: number;
}

export function decodeRequestHeader(buf: Buffer): RequestHeader {
  return {
    magicOk: buf.subarray(0, 4).equals(MAGIC),
    version: buf.readUInt8(4),
    rows: buf.readUInt32LE(5),
    cols: buf.readUInt32LE(9),
    variance: buf.readDoubleLE(13),
  };
}

export function encodeRequest(
  image: Float64Array,
  rows: number,
  cols: number,
  variance: number,
  version: number = PROTOCOL_VERSION,
): Buffer {
  const buf = Buffer.alloc(REQUEST_HEADER_SIZE + 8 * rows * cols);
  MAGIC.copy(buf, 0);
  buf.writeUInt8(version, 4);
  buf.writeUInt32LE(rows, 5);
  buf.writeUInt32LE(cols, 9);
  buf.writeDoubleLE(variance, 13);
  writePayload(buf, REQUEST_HEADER_SIZE, image);
  return buf;
}

export function encodeResponse(image: Float64Array, rows: number, cols: number): Buffer {
  const buf = Buffer.alloc(RESPONSE_HEADER_SIZE + 8 * rows * cols);
  MAGIC.copy(buf, 0);
  buf.writeUInt8(0, 4);
  buf.writeUInt32LE(rows, 5);
  buf.writeUInt32LE(cols, 9);
  writePayload(buf, RESPONSE_HEADER_SIZE, image);
  return buf;
}

export function encodeErrorResponse(message: string): Buffer {
  const msg = Buffer.from(message, "utf-8");
  const buf = Buffer.alloc(RESPONSE_HEADER_SIZE + 4 + msg.length);
  MAGIC.copy(buf, 0);
  buf.writeUInt8(1, 4);
  buf.writeUInt32LE(0, 5);
  buf.writeUInt32LE(0, 9);
  buf.writeUInt32LE(msg.length, 13);
  msg.copy(buf, 17);
  return buf;
}

/** Decode a float64 payload; copies so alignment never matters. */
export function decodePayload(buf: Buffer): Float64Array {
  const out = new Float64Array(buf.length / 8);
  const bytes = new Uint8Array(out.buffer);
  bytes.set(buf);
  return out;
}

function writePayload(buf: Buffer, offset: number, image: Float64Array): void {
  const bytes = new Uint8Array(image.buffer, image.byteOffset, image.byteLength);
  buf.set(bytes, offset);
}
