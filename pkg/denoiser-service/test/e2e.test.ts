/**
 * End-to-end: the reconstruction CLI runs its denoiser-fused ADMM solver
 * with this package's gaussian-reference server as the external denoiser,
 * over the full seeded 20-phantom suite at 300 iterations.  Every
 * reconstruction must complete with no protocol errors and contain only
 * finite, nonnegative values.  Requires the `rsm` CLI on PATH.
 */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

const here = path.dirname(fileURLToPath(import.meta.url));
const MAIN = path.join(here, "..", "dist", "main.js");
const SERVER_CMD = `node ${MAIN} --mode gaussian-reference`;

/** Parse the rsm-binary format: "RSM1", u32 rows, u32 cols, float64 payload. */
function readRsm(file: string): { rows: number; cols: number; data: Float64Array } {
  const buf = fs.readFileSync(file);
  expect(buf.subarray(0, 4).toString("ascii")).toBe("RSM1");
  const rows = buf.readUInt32LE(4);
  const cols = buf.readUInt32LE(8);
  expect(buf.length).toBe(12 + 8 * rows * cols);
  const data = new Float64Array(rows * cols);
  new Uint8Array(data.buffer).set(buf.subarray(12));
  return { rows, cols, data };
}

function rsm(args: string[]): void {
  execFileSync("rsm", args, { stdio: ["ignore", "ignore", "inherit"] });
}

let dir: string;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "rsm-e2e-"));
  rsm(["phantom", "--suite", "--seed", "0", "--out", path.join(dir, "suite")]);
  rsm(["synth-drm", "--out", path.join(dir, "drm.rsm")]);
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("reconstruction with the gaussian-reference server", () => {
  it("produces finite nonnegative images over 300 iterations x 20 phantoms", () => {
    const phantoms = fs
      .readdirSync(path.join(dir, "suite"))
      .filter((f) => f.endsWith(".rsm"))
      .sort();
    expect(phantoms.length).toBe(20);
    for (const [idx, name] of phantoms.entries()) {
      const drc = path.join(dir, `drc_${idx}.rsm`);
      const rec = path.join(dir, `rec_${idx}.rsm`);
      rsm(["simulate", "--drm", path.join(dir, "drm.rsm"),
        "--image", path.join(dir, "suite", name), "--seed", String(idx), "--out", drc]);
      // exit 0 means the solver saw no bridge/protocol errors
      rsm(["reconstruct", "--method", "l1-dnn", "--iters", "300",
        "--drm", path.join(dir, "drm.rsm"), "--drc", drc,
        "--denoiser", "external", "--denoiser-cmd", SERVER_CMD, "--out", rec]);
      const { rows, cols, data } = readRsm(rec);
      expect(rows).toBe(75);
      expect(cols).toBe(180);
      expect(data.every((v) => Number.isFinite(v) && v >= 0)).toBe(true);
    }
  }, 900000);
});
