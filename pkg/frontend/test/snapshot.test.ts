import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { Snapshot, readSnapshot, toLab, toSheared } from "../src/snapshot";

const tiltBase = fileURLToPath(
  new URL("./fixtures/tilt_run/snapshot_000", import.meta.url),
);

/** Smooth periodic 2-D test field (Gaussian bump, width well resolved). */
function gaussianSnapshot(n = 128, L = 20, frame: "sheared" | "lab" = "lab"): Snapshot {
  const dx = L / n;
  const values = new Float64Array(n * n);
  for (let i = 0; i < n; i++) {
    const x = -L / 2 + i * dx;
    for (let j = 0; j < n; j++) {
      const y = -L / 2 + j * dx;
      values[i * n + j] = Math.exp(-(x * x + y * y) / 18);
    }
  }
  return {
    values,
    shape: [n, n],
    spacing: [dx, dx],
    origin: [-L / 2, -L / 2],
    time: 0.5,
    A: 2,
    epsilon: 0,
    frame,
    shear: frame === "lab" ? 0 : 1,
  };
}

describe("readSnapshot", () => {
  it("reads a solver snapshot with its sidecar", () => {
    const s = readSnapshot(tiltBase);
    expect(s.shape).toEqual([256, 256]);
    expect(s.frame).toBe("sheared");
    expect(s.A).toBe(100);
    expect(s.time).toBeCloseTo(0.1, 12);
    expect(s.values.length).toBe(256 * 256);
    expect(Number.isFinite(s.shear)).toBe(true);
  });

  it("faults when the binary length is inconsistent with the sidecar", () => {
    const dir = mkdtempSync(join(tmpdir(), "snap-"));
    const base = join(dir, "bad");
    writeFileSync(
      base + ".json",
      JSON.stringify({
        shape: [4, 4],
        spacing: [1, 1],
        origin: [0, 0],
        time: 0,
        A: 0,
        epsilon: 0,
        frame: "lab",
        shear: 0,
      }),
    );
    writeFileSync(base + ".bin", Buffer.alloc(8 * 15)); // one value short
    expect(() => readSnapshot(base)).toThrow(/inconsistent with shape/);
  });

  it("faults on a corrupt sidecar", () => {
    const dir = mkdtempSync(join(tmpdir(), "snap-"));
    const base = join(dir, "bad");
    writeFileSync(
      base + ".json",
      JSON.stringify({
        shape: [4, 4],
        spacing: [1, -1],
        origin: [0, 0],
        time: 0,
        A: 0,
        epsilon: 0,
        frame: "lab",
      }),
    );
    writeFileSync(base + ".bin", Buffer.alloc(8 * 16));
    expect(() => readSnapshot(base)).toThrow(/spacing/);
  });
});

describe("frame maps", () => {
  it("round-trips lab -> sheared -> lab to interpolation tolerance", () => {
    const lab = gaussianSnapshot();
    const sheared = toSheared(lab, 0.7);
    expect(sheared.frame).toBe("sheared");
    const back = toLab(sheared);
    let err = 0;
    for (let k = 0; k < lab.values.length; k++) {
      err = Math.max(err, Math.abs(back.values[k] - lab.values[k]));
    }
    expect(err).toBeLessThan(1e-3);
  });

  it("leaves a snapshot alone when it is already in the requested frame", () => {
    const lab = gaussianSnapshot();
    expect(toLab(lab)).toBe(lab);
    const sheared = gaussianSnapshot(64, 20, "sheared");
    expect(toSheared(sheared)).toBe(sheared);
  });

  it("is exact for integer-cell shifts", () => {
    const lab = gaussianSnapshot(32, 32); // dx = 1, y integers
    const sheared = toSheared(lab, 1); // shift per row = y_j cells, integral
    const back = toLab(sheared);
    let err = 0;
    for (let k = 0; k < lab.values.length; k++) {
      err = Math.max(err, Math.abs(back.values[k] - lab.values[k]));
    }
    expect(err).toBeLessThan(1e-14);
  });
});
