// snapshot.ts
//
// Reader and frame maps for density snapshots: a flat little-endian
// float64 binary (C order) next to a JSON sidecar.  The solver works in a
// sheared frame with lab x = x' + S y; the sidecar records S under
// "shear" (the integrator remaps S into a bounded range, so it need not
// equal A * t).

import { readFileSync } from "node:fs";

export type Snapshot = {
  values: Float64Array;
  shape: number[];
  spacing: number[];
  origin: number[];
  time: number;
  A: number;
  epsilon: number;
  frame: "sheared" | "lab";
  shear: number;
};

export function readSnapshot(base: string): Snapshot {
  const meta = JSON.parse(readFileSync(base + ".json", "utf8"));
  const shape: number[] = meta.shape;
  const spacing: number[] = meta.spacing;
  const origin: number[] = meta.origin;
  if (!Array.isArray(shape) || shape.length < 2 || shape.length > 3) {
    throw new Error(`corrupt sidecar: shape must be 2-D or 3-D, got ${shape}`);
  }
  if (spacing.length !== shape.length || origin.length !== shape.length) {
    throw new Error("corrupt sidecar: spacing/origin rank mismatch");
  }
  if (spacing.some((s) => !(s > 0))) {
    throw new Error("corrupt sidecar: spacing must be positive");
  }
  if (meta.frame !== "sheared" && meta.frame !== "lab") {
    throw new Error(`corrupt sidecar: unknown frame '${meta.frame}'`);
  }
  const raw = readFileSync(base + ".bin");
  const n = shape.reduce((a, b) => a * b, 1);
  if (raw.byteLength !== 8 * n) {
    throw new Error(
      `snapshot byte length ${raw.byteLength} inconsistent with shape [${shape}]`,
    );
  }
  const values = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    values[i] = raw.readDoubleLE(8 * i);
  }
  const shear =
    typeof meta.shear === "number"
      ? meta.shear
      : meta.frame === "lab"
        ? 0
        : meta.A * meta.time;
  return {
    values,
    shape,
    spacing,
    origin,
    time: meta.time,
    A: meta.A,
    epsilon: meta.epsilon,
    frame: meta.frame,
    shear,
  };
}

/** Middle z-slice of a 3-D snapshot (identity for 2-D). */
export function midSlice(s: Snapshot): Snapshot {
  if (s.shape.length === 2) {
    return s;
  }
  const [nx, ny, nz] = s.shape;
  const kz = Math.floor(nz / 2);
  const values = new Float64Array(nx * ny);
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      values[i * ny + j] = s.values[(i * ny + j) * nz + kz];
    }
  }
  return {
    ...s,
    values,
    shape: [nx, ny],
    spacing: s.spacing.slice(0, 2),
    origin: s.origin.slice(0, 2),
  };
}

// shift each x-line (fixed y index j) by delta(j) grid cells with periodic
// linear interpolation; values are C order with index ix * ny + iy.
function shiftX(
  values: Float64Array,
  nx: number,
  ny: number,
  delta: (j: number) => number,
): Float64Array {
  const out = new Float64Array(nx * ny);
  for (let j = 0; j < ny; j++) {
    const d = delta(j);
    for (let i = 0; i < nx; i++) {
      const p = i - d;
      const i0 = Math.floor(p);
      const w = p - i0;
      const a = ((i0 % nx) + nx) % nx;
      const b = (a + 1) % nx;
      out[i * ny + j] = (1 - w) * values[a * ny + j] + w * values[b * ny + j];
    }
  }
  return out;
}

/** Map a sheared-frame snapshot to the lab frame: x -> x + S y. */
export function toLab(s: Snapshot): Snapshot {
  if (s.frame === "lab") {
    return s;
  }
  if (s.shape.length !== 2) {
    throw new Error("frame maps are implemented for 2-D snapshots");
  }
  const [nx, ny] = s.shape;
  const [dx, dy] = s.spacing;
  // lab value at x_i is the sheared field at x_i - S y_j
  const values = shiftX(s.values, nx, ny, (j) => {
    const y = s.origin[1] + j * dy;
    return (s.shear * y) / dx;
  });
  return { ...s, values, frame: "lab", shear: 0 };
}

/** Map a lab-frame snapshot back to a sheared frame with shear S. */
export function toSheared(s: Snapshot, S?: number): Snapshot {
  if (s.frame === "sheared") {
    return s;
  }
  if (s.shape.length !== 2) {
    throw new Error("frame maps are implemented for 2-D snapshots");
  }
  const shear = S === undefined ? s.A * s.time : S;
  const [nx, ny] = s.shape;
  const [dx, dy] = s.spacing;
  const values = shiftX(s.values, nx, ny, (j) => {
    const y = s.origin[1] + j * dy;
    return (-shear * y) / dx;
  });
  return { ...s, values, frame: "sheared", shear };
}
