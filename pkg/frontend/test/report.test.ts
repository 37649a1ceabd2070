import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { runCli } from "../src/cli";
import { SECTIONS, discoverInputs, loadBundle, renderReport } from "../src/report";

const fixtures = fileURLToPath(new URL("./fixtures", import.meta.url));

describe("discoverInputs / loadBundle", () => {
  it("finds run bundles given their directories or a parent directory", () => {
    const direct = discoverInputs([join(fixtures, "run_a200")]);
    expect(direct.bundles.length).toBe(1);
    const nested = discoverInputs([fixtures]);
    expect(nested.bundles.map((b) => b.name).sort()).toEqual([
      "run_a200",
      "tilt_run",
    ]);
  });

  it("faults on a directory that is missing", () => {
    expect(() => discoverInputs([join(fixtures, "nope")])).toThrow(/not found/);
  });

  it("loads snapshots listed next to the diagnostics", () => {
    const b = loadBundle(join(fixtures, "run_a200"));
    expect(b.snapshotBases.length).toBe(1);
    expect(b.summary.A).toBe(200);
  });
});

describe("renderReport", () => {
  it("notes 'no runs' when given nothing", () => {
    const html = renderReport({ bundles: [], checks: [] });
    expect(html).toContain("no runs");
  });

  it("contains one section per verification area", () => {
    expect(SECTIONS.length).toBe(9);
    for (const inputs of [
      { bundles: [], checks: [] },
      discoverInputs([fixtures]),
    ]) {
      const html = renderReport(inputs);
      for (const sec of SECTIONS) {
        expect(html).toContain(`<section id="${sec.id}">`);
      }
    }
  });

  it("includes decay figures and snapshot maps for real bundles", () => {
    const html = renderReport(discoverInputs([fixtures]));
    expect(html).toContain("norm decay, A=200");
    expect(html).toContain("envelope constants");
    expect(html).toContain("principal-axis tilt");
    expect(html).toContain("<svg");
  });

  it("renders check-report tables into the estimate sections", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-"));
    writeFileSync(
      join(dir, "checks.json"),
      JSON.stringify([
        { lemma: "init", passed: true, n_cases: 12, sup_ratio: 1.5 },
        { lemma: "mid", passed: true, n_cases: 30, sup_ratio: 0.7 },
      ]),
    );
    const inputs = discoverInputs([dir]);
    expect(inputs.checks.length).toBe(1);
    const html = renderReport(inputs);
    expect(html).toContain("init");
    expect(html).toContain("mid");
    expect(html.match(/PASS/g)!.length).toBeGreaterThanOrEqual(2);
  });

  it("is deterministic: same inputs give byte-identical output", () => {
    const a = renderReport(discoverInputs([fixtures]));
    const b = renderReport(discoverInputs([fixtures]));
    expect(a).toBe(b);
    expect(a).not.toMatch(/\d{4}-\d{2}-\d{2}T/); // no timestamps
  });
});

describe("cli", () => {
  it("writes a report from input directories", () => {
    const out = join(mkdtempSync(join(tmpdir(), "cli-")), "report.html");
    const code = runCli(["report", "--in", fixtures, "--out", out]);
    expect(code).toBe(0);
    const html = readFileSync(out, "utf8");
    expect(html).toContain("<!DOCTYPE html>");
    expect(html).toContain("norm decay, A=200");
  });

  it("writes byte-identical reports across reruns", () => {
    const dir = mkdtempSync(join(tmpdir(), "cli-"));
    const out1 = join(dir, "a.html");
    const out2 = join(dir, "b.html");
    expect(runCli(["report", "--in", fixtures, "--out", out1])).toBe(0);
    expect(runCli(["report", "--in", fixtures, "--out", out2])).toBe(0);
    expect(readFileSync(out1)).toEqual(readFileSync(out2));
  });

  it("faults on unknown arguments and missing --out", () => {
    expect(runCli(["report", "--what"])).toBe(1);
    expect(runCli(["report", "--in", fixtures])).toBe(1);
    expect(runCli(["nope"])).toBe(1);
  });
});
