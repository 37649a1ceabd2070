import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { column, parseDiagnostics } from "../src/csv";
import { plotDecay } from "../src/decay";
import { envelopeA, periodizationFactor } from "../src/envelope";

const bundleDir = fileURLToPath(new URL("./fixtures/run_a200", import.meta.url));

function loadFixture() {
  const diagnostics = parseDiagnostics(
    readFileSync(join(bundleDir, "diagnostics.csv"), "utf8"),
  );
  const summary = JSON.parse(readFileSync(join(bundleDir, "summary.json"), "utf8"));
  return { diagnostics, summary };
}

describe("plotDecay", () => {
  it("envelope overlay upper-bounds a real large-A run past t = A^-theta", () => {
    const { diagnostics, summary } = loadFixture();
    const fig = plotDecay(diagnostics, summary);
    expect(fig.tBreak).toBeCloseTo(Math.pow(200, -0.8), 12);
    const t = column(diagnostics, "t");
    const l2 = column(diagnostics, "l2");
    const linf = column(diagnostics, "linf");
    for (let k = 0; k < fig.overlayT.length; k++) {
      const i = t.indexOf(fig.overlayT[k]);
      expect(fig.overlayL2[k]).toBeGreaterThanOrEqual(l2[i] * (1 - 1e-12));
      expect(fig.overlayLinf[k]).toBeGreaterThanOrEqual(linf[i] * (1 - 1e-12));
    }
    // the constant is attained somewhere, so the bound is tight
    const gapsL2 = fig.overlayT.map(
      (ti, k) => fig.overlayL2[k] / l2[t.indexOf(ti)],
    );
    expect(Math.min(...gapsL2)).toBeLessThanOrEqual(1 + 1e-12);
  });

  it("marks both regime boundaries in the figure", () => {
    const { diagnostics, summary } = loadFixture();
    const fig = plotDecay(diagnostics, summary);
    const markers = [...fig.svg.matchAll(/class="marker"/g)];
    expect(markers.length).toBe(2);
    expect(fig.svg).toContain("t=A^-theta");
    expect(fig.svg).toContain("t=1");
  });

  it("coincides with synthetic diagnostics equal to the envelope itself", () => {
    const summary = { A: 50, theta: 0.8, gamma: 0.5, box: [40, 40] };
    const lines = ["t, mass, l2, l4, linf, min_n, envelope_ratio, tail_frac, blowup_flag"];
    const ts: number[] = [];
    for (let k = 0; k < 60; k++) {
      ts.push(Math.pow(10, -2 + (3 * k) / 59)); // 0.01 .. 10
    }
    for (const t of ts) {
      const v =
        envelopeA(t, summary) * periodizationFactor(t, summary.A, summary.box);
      lines.push(`${t}, 1, ${v}, ${v}, ${v}, 0, 1, 0, 0`);
    }
    const fig = plotDecay(parseDiagnostics(lines.join("\n") + "\n"), summary);
    let maxGap = 0;
    for (let k = 0; k < fig.overlayT.length; k++) {
      const i = fig.t.indexOf(fig.overlayT[k]);
      maxGap = Math.max(
        maxGap,
        Math.abs(Math.log(fig.overlayL2[k] / fig.l2[i])),
        Math.abs(Math.log(fig.overlayLinf[k] / fig.linf[i])),
      );
    }
    expect(maxGap).toBeLessThan(1e-9);
  });

  it("faults on empty diagnostics with a clear message", () => {
    expect(() => parseDiagnostics("")).toThrow(/empty/);
  });

  it("faults on missing norm columns", () => {
    const tab = parseDiagnostics("t, mass\n1, 1\n");
    expect(() =>
      plotDecay(tab, { A: 10, theta: 0.8, gamma: 0.5 }),
    ).toThrow(/missing column/);
  });
});
