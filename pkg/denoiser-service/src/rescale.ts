/**
 * Unit-range rescaling for denoisers that assume bounded inputs.
 *
 * Forward map:  x' = (x - min) * scale  with scale = 1 / (max - min),
 * so x' lies in [0, 1]; the noise standard deviation transforms by the
 * same factor (sigma' = sigma * scale).  Inverse: x = x' / scale + min,
 * which restores the original dynamic range exactly up to float64
 * rounding.  A constant image (max == min) uses scale = 1 so both maps
 * reduce to a shift by min.
 */

export interface Rescaled {
  data: Float64Array;
  min: number;
  scale: number;
}

export function toUnitRange(data: Float64Array): Rescaled {
  let min = Infinity;
  let max = -Infinity;
  for (const v of data) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  const scale = max > min ? 1.0 / (max - min) : 1.0;
  const out = new Float64Array(data.length);
  for (let i = 0; i < data.length; i++) out[i] = (data[i] - min) * scale;
  return { data: out, min, scale };
}

export function fromUnitRange(data: Float64Array, min: number, scale: number): Float64Array {
  const out = new Float64Array(data.length);
  for (let i = 0; i < data.length; i++) out[i] = data[i] / scale + min;
  return out;
}
