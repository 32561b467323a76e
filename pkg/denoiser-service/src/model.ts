/**
 * Neural denoiser wrapper.
 *
 * The model is a layers-format graph stored on disk as model.json +
 * weights.bin (see make_model.ts for the shipped stand-in).  It takes a
 * [1, h, w, 2] tensor — the image concatenated with a constant
 * noise-standard-deviation map — and predicts the denoised [1, h, w, 1]
 * image.  The received variance conditions the model as sigma =
 * sqrt(variance), transformed consistently with any input rescaling.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { fromUnitRange, toUnitRange } from "./rescale.js";

/** Minimal file-system IOHandler (the browser-oriented core has none). */
export function fileSystemIO(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts) {
      fs.mkdirSync(dir, { recursive: true });
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(weightData));
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          format: artifacts.format,
          generatedBy: artifacts.generatedBy,
          weightsManifest: [{ paths: ["weights.bin"], weights: artifacts.weightSpecs }],
        }),
      );
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON" as const,
        },
      };
    },
    async load(): Promise<tf.io.ModelArtifacts> {
      const manifest = JSON.parse(fs.readFileSync(path.join(dir, "model.json"), "utf-8"));
      const groups = manifest.weightsManifest as Array<{ paths: string[]; weights: tf.io.WeightsManifestEntry[] }>;
      const buffers = groups.flatMap((g) => g.paths).map((p) => fs.readFileSync(path.join(dir, p)));
      const data = Buffer.concat(buffers);
      return {
        modelTopology: manifest.modelTopology,
        weightSpecs: groups.flatMap((g) => g.weights),
        weightData: data.buffer.slice(data.byteOffset, data.byteOffset + data.byteLength),
      };
    },
  };
}

export class NeuralDenoiser {
  private constructor(private model: tf.LayersModel, private rescale: "none" | "unit-range") {}

  static async load(modelPath: string, rescale: "none" | "unit-range"): Promise<NeuralDenoiser> {
    const model = await tf.loadLayersModel(fileSystemIO(modelPath));
    return new NeuralDenoiser(model, rescale);
  }

  denoise(image: Float64Array, rows: number, cols: number, variance: number): Float64Array {
    let input = image;
    let min = 0.0;
    let scale = 1.0;
    if (this.rescale === "unit-range") {
      ({ data: input, min, scale } = toUnitRange(image));
    }
    const sigma = Math.sqrt(variance) * scale;
    const out = tf.tidy(() => {
      const img = tf.tensor4d(Float32Array.from(input), [1, rows, cols, 1]);
      const level = tf.fill([1, rows, cols, 1], sigma);
      const pred = this.model.predict(tf.concat([img, level], 3)) as tf.Tensor;
      return pred.dataSync();
    });
    const result = Float64Array.from(out);
    return this.rescale === "unit-range" ? fromUnitRange(result, min, scale) : result;
  }
}
