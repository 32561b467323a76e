/**
 * Build and briefly train the shipped stand-in denoiser model.
 *
 * A three-layer convolutional net mapping [h, w, 2] (unit-range image +
 * constant noise-sigma map) to the denoised [h, w, 1] image.  Training
 * data is synthetic: smoothed random fields in [0, 1] corrupted with
 * Gaussian noise of random sigma, so the net learns generic
 * sigma-conditioned smoothing.  Usage: node dist/make_model.js <outdir>
 */

import * as tf from "@tensorflow/tfjs";

import { gaussianBlur } from "./blur.js";
import { fileSystemIO } from "./model.js";

const PATCH = 24;
const BATCH = 16;
const STEPS = 300;

function buildModel(): tf.LayersModel {
  const model = tf.sequential();
  model.add(tf.layers.conv2d({
    inputShape: [null as unknown as number, null as unknown as number, 2],
    filters: 12, kernelSize: 3, padding: "same", activation: "relu",
  }));
  model.add(tf.layers.conv2d({ filters: 12, kernelSize: 3, padding: "same", activation: "relu" }));
  model.add(tf.layers.conv2d({ filters: 1, kernelSize: 3, padding: "same" }));
  model.compile({ optimizer: tf.train.adam(1e-3), loss: "meanSquaredError" });
  return model;
}

function makeBatch(rng: () => number) {
  const inputs = new Float32Array(BATCH * PATCH * PATCH * 2);
  const targets = new Float32Array(BATCH * PATCH * PATCH);
  for (let b = 0; b < BATCH; b++) {
    const field = new Float64Array(PATCH * PATCH);
    for (let i = 0; i < field.length; i++) field[i] = rng();
    const clean = gaussianBlur(field, PATCH, PATCH, 1.5);
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of clean) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    const span = hi > lo ? hi - lo : 1.0;
    const sigma = 0.02 + 0.28 * rng();
    for (let i = 0; i < field.length; i++) {
      const c = (clean[i] - lo) / span;
      // Box-Muller normal sample
      const noise = Math.sqrt(-2.0 * Math.log(1.0 - rng())) * Math.cos(2.0 * Math.PI * rng());
      const base = (b * PATCH * PATCH + i) * 2;
      inputs[base] = c + sigma * noise;
      inputs[base + 1] = sigma;
      targets[b * PATCH * PATCH + i] = c;
    }
  }
  return {
    x: tf.tensor4d(inputs, [BATCH, PATCH, PATCH, 2]),
    y: tf.tensor4d(targets, [BATCH, PATCH, PATCH, 1]),
  };
}

/** Small deterministic PRNG (mulberry32) so the artifact is reproducible. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

async function main(): Promise<void> {
  const outDir = process.argv[2];
  if (!outDir) {
    console.error("usage: make_model.js <output-directory>");
    process.exit(2);
  }
  const rng = mulberry32(1234);
  const model = buildModel();
  for (let step = 0; step < STEPS; step++) {
    const { x, y } = makeBatch(rng);
    const history = await model.fit(x, y, { epochs: 1, verbose: 0 });
    x.dispose();
    y.dispose();
    if (step % 50 === 0 || step === STEPS - 1) {
      console.error(`step ${step}: loss ${(history.history.loss as number[])[0].toFixed(6)}`);
    }
  }
  await model.save(fileSystemIO(outDir));
  console.error(`saved model to ${outDir}`);
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
