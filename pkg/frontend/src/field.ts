// field.ts
//
// Snapshot figures: heat maps in the sheared or lab frame, block-mean
// downsampling, and the principal-axis tilt of the pattern (a moment fit,
// compared elsewhere against the ridge angle arctan(2 / (A t))).

import { Snapshot, midSlice, toLab, toSheared } from "./snapshot.js";
import { heatMap } from "./svg.js";

/** Block-mean downsample so neither axis exceeds `target` cells. */
export function downsample(
  values: Float64Array,
  nx: number,
  ny: number,
  target = 64,
): { values: Float64Array; nx: number; ny: number } {
  const bx = Math.max(1, Math.ceil(nx / target));
  const by = Math.max(1, Math.ceil(ny / target));
  if (bx === 1 && by === 1) {
    return { values, nx, ny };
  }
  const mx = Math.floor(nx / bx);
  const my = Math.floor(ny / by);
  const out = new Float64Array(mx * my);
  for (let I = 0; I < mx; I++) {
    for (let J = 0; J < my; J++) {
      let s = 0;
      for (let i = 0; i < bx; i++) {
        for (let j = 0; j < by; j++) {
          s += values[(I * bx + i) * ny + (J * by + j)];
        }
      }
      out[I * my + J] = s / (bx * by);
    }
  }
  return { values: out, nx: mx, ny: my };
}

/** Heat map of a snapshot in the requested frame. */
export function plotField(
  snap: Snapshot,
  frame: "sheared" | "lab",
  title = "",
): string {
  let s = midSlice(snap);
  if (frame === "lab" && s.frame === "sheared") {
    s = toLab(s);
  } else if (frame === "sheared" && s.frame === "lab") {
    s = toSheared(s);
  }
  const [nx, ny] = s.shape;
  const d = downsample(s.values, nx, ny);
  const label = title || `t=${s.time} A=${s.A} (${frame} frame)`;
  return heatMap(label, d.values, d.nx, d.ny);
}

/**
 * Principal-axis angle (radians from the x axis) of the |density| second
 * moments of a 2-D snapshot.
 */
export function principalTilt(snap: Snapshot): number {
  const s = midSlice(snap);
  const [nx, ny] = s.shape;
  const [dx, dy] = s.spacing;
  let m = 0;
  let mx = 0;
  let my = 0;
  for (let i = 0; i < nx; i++) {
    const x = s.origin[0] + i * dx;
    for (let j = 0; j < ny; j++) {
      const w = Math.abs(s.values[i * ny + j]);
      m += w;
      mx += w * x;
      my += w * (s.origin[1] + j * dy);
    }
  }
  if (!(m > 0)) {
    throw new Error("tilt undefined for an identically zero field");
  }
  const cx = mx / m;
  const cy = my / m;
  let cxx = 0;
  let cyy = 0;
  let cxy = 0;
  for (let i = 0; i < nx; i++) {
    const x = s.origin[0] + i * dx - cx;
    for (let j = 0; j < ny; j++) {
      const w = Math.abs(s.values[i * ny + j]);
      const y = s.origin[1] + j * dy - cy;
      cxx += w * x * x;
      cyy += w * y * y;
      cxy += w * x * y;
    }
  }
  return 0.5 * Math.atan2(2 * cxy, cxx - cyy);
}
