import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { chi, envelopeA, periodizationFactor, regimeBreak } from "../src/envelope";

const refs = JSON.parse(
  readFileSync(
    fileURLToPath(new URL("./fixtures/envelope_refs.json", import.meta.url)),
    "utf8",
  ),
);

describe("envelopeA", () => {
  it("matches the simulation package's values across all branches", () => {
    for (const c of refs.envelope) {
      const v = envelopeA(c.t, { A: c.A, theta: c.theta, gamma: c.gamma });
      expect(Math.abs(v - c.value)).toBeLessThanOrEqual(1e-12 * Math.abs(c.value));
    }
  });

  it("is 1 on the whole early regime and for A = 0", () => {
    const p = { A: 100, theta: 0.8, gamma: 0.5 };
    const tb = regimeBreak(p);
    expect(envelopeA(tb, p)).toBe(1); // tie goes to the earlier branch
    expect(envelopeA(1e-8, p)).toBe(1);
    expect(envelopeA(7.3, { A: 0, theta: 0.8, gamma: 0.5 })).toBe(1);
    expect(regimeBreak({ A: 0, theta: 0.8, gamma: 0.5 })).toBe(Infinity);
  });

  it("rejects nonpositive times", () => {
    expect(() => envelopeA(0, { A: 1, theta: 0.8, gamma: 0.5 })).toThrow();
  });
});

describe("chi", () => {
  it("switches on strictly after t = 1", () => {
    expect(chi(1)).toBe(0);
    expect(chi(1.0000001)).toBe(1);
    expect(chi(0.5)).toBe(0);
  });
});

describe("periodizationFactor", () => {
  it("matches the simulation package's image sums", () => {
    for (const c of refs.periodization) {
      const v = periodizationFactor(c.t, c.A, c.box);
      expect(Math.abs(v - c.value)).toBeLessThanOrEqual(1e-9 * Math.abs(c.value));
    }
  });

  it("grows as the pattern outruns the box", () => {
    const box = [40, 40];
    const early = periodizationFactor(0.01, 200, box);
    const late = periodizationFactor(10, 200, box);
    expect(late).toBeGreaterThan(100 * early);
  });
});
