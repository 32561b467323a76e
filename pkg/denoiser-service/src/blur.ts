/**
 * Separable Gaussian blur mirroring the reconstruction package's built-in
 * (gaussian-reference mode exists so the two implementations can be
 * cross-checked): sigma = sqrt(variance), radius = max(1, ceil(4*sigma)),
 * taps exp(-0.5 (t/sigma)^2) normalized to sum 1; the polar axis (rows)
 * replicates at the boundary, the azimuth axis (columns) wraps.
 */

/** Normalized 1-D Gaussian taps, radius = max(1, ceil(4*sigma)). */
export function gaussianKernel(sigma: number): Float64Array {
  const radius = Math.max(1, Math.ceil(4.0 * sigma));
  const w = new Float64Array(2 * radius + 1);
  let sum = 0.0;
  for (let t = -radius; t <= radius; t++) {
    const v = Math.exp(-0.5 * (t / sigma) ** 2);
    w[t + radius] = v;
    sum += v;
  }
  for (let i = 0; i < w.length; i++) w[i] /= sum;
  return w;
}

export function gaussianBlur(
  image: Float64Array,
  rows: number,
  cols: number,
  sigma: number,
): Float64Array {
  if (sigma <= 0) return image.slice();
  const w = gaussianKernel(sigma);
  const radius = (w.length - 1) / 2;

  // vertical pass, replicate rows
  const tmp = new Float64Array(rows * cols);
  for (let t = -radius; t <= radius; t++) {
    const wt = w[t + radius];
    for (let i = 0; i < rows; i++) {
      const src = Math.min(Math.max(i + t, 0), rows - 1) * cols;
      const dst = i * cols;
      for (let j = 0; j < cols; j++) tmp[dst + j] += wt * image[src + j];
    }
  }
  // horizontal pass, wrap columns
  const out = new Float64Array(rows * cols);
  for (let t = -radius; t <= radius; t++) {
    const wt = w[t + radius];
    const shift = ((t % cols) + cols) % cols;
    for (let i = 0; i < rows; i++) {
      const base = i * cols;
      for (let j = 0; j < cols; j++) {
        out[base + j] += wt * tmp[base + ((j + shift) % cols)];
      }
    }
  }
  return out;
}
