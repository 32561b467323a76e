/**
 * Single-threaded request loop for the denoiser bridge protocol.
 *
 * Per frame: validate magic/version/dims, consume the payload, run the
 * configured denoiser, respond exactly once.  Recoverable problems
 * (wrong version, empty dims, non-finite variance) get a status-1
 * response and the loop continues; an unreadable stream (bad magic or
 * truncation, after which framing is lost) gets a final status-1
 * response where possible and a nonzero exit.  Clean end-of-input
 * between frames exits 0.
 */

import type { Readable, Writable } from "node:stream";

import { gaussianBlur } from "./blur.js";
import { NeuralDenoiser } from "./model.js";
import {
  PROTOCOL_VERSION,
  REQUEST_HEADER_SIZE,
  decodePayload,
  decodeRequestHeader,
  encodeErrorResponse,
  encodeResponse,
} from "./protocol.js";

export interface ServerConfig {
  mode: "echo" | "gaussian-reference" | "neural";
  modelPath?: string;
  rescale: "none" | "unit-range";
}

/** Buffers a Readable so frames can be consumed with exact-length reads. */
export class StreamReader {
  private buffered: Buffer[] = [];
  private length = 0;
  private ended = false;
  private wake: (() => void) | null = null;

  constructor(stream: Readable) {
    stream.on("data", (chunk: Buffer) => {
      this.buffered.push(chunk);
      this.length += chunk.length;
      this.notify();
    });
    stream.on("end", () => {
      this.ended = true;
      this.notify();
    });
    stream.on("error", () => {
      this.ended = true;
      this.notify();
    });
  }

  private notify(): void {
    if (this.wake) {
      const w = this.wake;
      this.wake = null;
      w();
    }
  }

  /**
   * Read exactly n bytes.  Returns null on end-of-input with zero bytes
   * pending; throws if the stream ends mid-read.
   */
  async readExact(n: number): Promise<Buffer | null> {
    while (this.length < n) {
      if (this.ended) {
        if (this.length === 0) return null;
        throw new Error(`stream ended with ${this.length}/${n} bytes pending`);
      }
      await new Promise<void>((resolve) => {
        this.wake = resolve;
      });
    }
    const joined = Buffer.concat(this.buffered);
    this.buffered = joined.length > n ? [joined.subarray(n)] : [];
    this.length = joined.length - n;
    return joined.subarray(0, n);
  }
}

function write(output: Writable, buf: Buffer): Promise<void> {
  return new Promise((resolve, reject) => {
    output.write(buf, (err) => (err ? reject(err) : resolve()));
  });
}

export async function serve(input: Readable, output: Writable, cfg: ServerConfig): Promise<number> {
  let neural: NeuralDenoiser | null = null;
  if (cfg.mode === "neural") {
    if (!cfg.modelPath) throw new Error("neural mode requires a model path");
    neural = await NeuralDenoiser.load(cfg.modelPath, cfg.rescale);
  }
  const reader = new StreamReader(input);

  for (;;) {
    let headerBuf: Buffer | null;
    try {
      headerBuf = await reader.readExact(REQUEST_HEADER_SIZE);
    } catch (err) {
      process.stderr.write(`denoiser server: truncated request header (${err})\n`);
      return 1;
    }
    if (headerBuf === null) return 0;
    const header = decodeRequestHeader(headerBuf);
    if (!header.magicOk) {
      // framing is unrecoverable without the magic anchor
      await write(output, encodeErrorResponse("bad request magic; stream desynchronized"));
      return 1;
    }
    let payloadBuf: Buffer | null;
    try {
      payloadBuf = await reader.readExact(8 * header.rows * header.cols);
    } catch (err) {
      process.stderr.write(`denoiser server: truncated payload (${err})\n`);
      return 1;
    }
    if (payloadBuf === null && header.rows * header.cols > 0) {
      process.stderr.write("denoiser server: truncated payload\n");
      return 1;
    }
    if (header.version !== PROTOCOL_VERSION) {
      await write(output, encodeErrorResponse(
        `unsupported protocol version ${header.version}, expected ${PROTOCOL_VERSION}`));
      continue;
    }
    if (header.rows === 0 || header.cols === 0) {
      await write(output, encodeErrorResponse("malformed frame: empty dimensions"));
      continue;
    }
    if (!Number.isFinite(header.variance) || header.variance < 0) {
      await write(output, encodeErrorResponse(
        `malformed frame: variance must be finite and >= 0, got ${header.variance}`));
      continue;
    }
    const image = decodePayload(payloadBuf as Buffer);

    let result: Float64Array;
    if (cfg.mode === "echo") {
      result = image;
    } else if (cfg.mode === "gaussian-reference") {
      result = gaussianBlur(image, header.rows, header.cols, Math.sqrt(header.variance));
    } else {
      result = (neural as NeuralDenoiser).denoise(image, header.rows, header.cols, header.variance);
    }
    if (!result.every(Number.isFinite)) {
      await write(output, encodeErrorResponse("denoiser produced non-finite values"));
      continue;
    }
    await write(output, encodeResponse(result, header.rows, header.cols));
  }
}
