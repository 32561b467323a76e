/**
 * CLI entry point: speaks the denoiser bridge protocol on stdin/stdout.
 *
 *   node dist/main.js --mode echo
 *   node dist/main.js --mode gaussian-reference
 *   node dist/main.js --mode neural --model ./model [--rescale unit-range]
 *
 * --rescale defaults to unit-range in neural mode (pretrained denoisers
 * assume bounded inputs) and none otherwise.
 */

import * as os from "node:os";
import { parseArgs } from "node:util";

import { serve, type ServerConfig } from "./server.js";

const MODES = ["echo", "gaussian-reference", "neural"] as const;
const RESCALES = ["none", "unit-range"] as const;

function parseConfig(argv: string[]): ServerConfig {
  const { values } = parseArgs({
    args: argv,
    options: {
      mode: { type: "string" },
      model: { type: "string" },
      rescale: { type: "string" },
    },
  });
  const mode = values.mode as ServerConfig["mode"] | undefined;
  if (!mode || !MODES.includes(mode)) {
    throw new Error(`--mode must be one of ${MODES.join("|")}`);
  }
  if (mode === "neural" && !values.model) {
    throw new Error("--mode neural requires --model <path>");
  }
  const rescale = (values.rescale ?? (mode === "neural" ? "unit-range" : "none")) as
    ServerConfig["rescale"];
  if (!RESCALES.includes(rescale)) {
    throw new Error(`--rescale must be one of ${RESCALES.join("|")}`);
  }
  return { mode, modelPath: values.model, rescale };
}

async function main(): Promise<number> {
  if (os.endianness() !== "LE") {
    process.stderr.write("denoiser server: little-endian host required\n");
    return 1;
  }
  let cfg: ServerConfig;
  try {
    cfg = parseConfig(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`denoiser server: ${(err as Error).message}\n`);
    return 2;
  }
  return serve(process.stdin, process.stdout, cfg);
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error("denoiser server: fatal:", err);
    process.exit(1);
  },
);
