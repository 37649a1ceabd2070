// report.ts
//
// Collates run bundles and verification reports into one self-contained
// HTML document.  A run bundle is a directory with diagnostics.csv and
// summary.json (plus optional snapshot pairs); verification reports are
// JSON arrays of per-check summaries.  Rendering is deterministic: fixed
// styling, stable ordering, no timestamps.

import { existsSync, readFileSync, readdirSync, statSync } from "node:fs";
import { basename, join } from "node:path";

import { Table, parseDiagnostics } from "./csv.js";
import { DecayFigure, RunSummary, plotDecay } from "./decay.js";
import { plotField, principalTilt } from "./field.js";
import { readSnapshot, toLab } from "./snapshot.js";

export type RunBundle = {
  dir: string;
  name: string;
  summary: RunSummary & Record<string, unknown>;
  diagnostics: Table;
  snapshotBases: string[];
};

export type CheckEntry = {
  lemma: string;
  passed?: boolean;
  n_cases?: number;
  sup_ratio?: number;
  [key: string]: unknown;
};

export type CheckReport = {
  path: string;
  entries: CheckEntry[];
};

export type Inputs = {
  bundles: RunBundle[];
  checks: CheckReport[];
};

export function loadBundle(dir: string): RunBundle {
  const diagPath = join(dir, "diagnostics.csv");
  const sumPath = join(dir, "summary.json");
  if (!existsSync(diagPath) || !existsSync(sumPath)) {
    throw new Error(`${dir} is not a run bundle (needs diagnostics.csv and summary.json)`);
  }
  const diagnostics = parseDiagnostics(readFileSync(diagPath, "utf8"));
  const summary = JSON.parse(readFileSync(sumPath, "utf8"));
  const snapshotBases: string[] = [];
  for (const f of readdirSync(dir).sort()) {
    if (f.endsWith(".json") && f !== "summary.json") {
      const base = join(dir, f.slice(0, -5));
      if (existsSync(base + ".bin")) {
        snapshotBases.push(base);
      }
    }
  }
  return { dir, name: basename(dir), summary, diagnostics, snapshotBases };
}

function isBundleDir(dir: string): boolean {
  return (
    existsSync(join(dir, "diagnostics.csv")) &&
    existsSync(join(dir, "summary.json"))
  );
}

function checkEntriesFrom(path: string): CheckEntry[] | null {
  try {
    const data = JSON.parse(readFileSync(path, "utf8"));
    if (
      Array.isArray(data) &&
      data.length > 0 &&
      data.every((e) => typeof e === "object" && typeof e.lemma === "string")
    ) {
      return data as CheckEntry[];
    }
  } catch {
    return null;
  }
  return null;
}

/**
 * Scan input directories: each is a run bundle, a directory of run
 * bundles (one level deep), and may carry check-report JSON files.
 */
export function discoverInputs(dirs: string[]): Inputs {
  const bundles: RunBundle[] = [];
  const checks: CheckReport[] = [];
  for (const dir of dirs) {
    if (!existsSync(dir) || !statSync(dir).isDirectory()) {
      throw new Error(`input directory not found: ${dir}`);
    }
    if (isBundleDir(dir)) {
      bundles.push(loadBundle(dir));
    }
    for (const f of readdirSync(dir).sort()) {
      const sub = join(dir, f);
      if (statSync(sub).isDirectory() && isBundleDir(sub)) {
        bundles.push(loadBundle(sub));
      } else if (f.endsWith(".json") && f !== "summary.json") {
        const entries = checkEntriesFrom(sub);
        if (entries) {
          checks.push({ path: sub, entries });
        }
      }
    }
  }
  bundles.sort((a, b) => (a.dir < b.dir ? -1 : a.dir > b.dir ? 1 : 0));
  checks.sort((a, b) => (a.path < b.path ? -1 : a.path > b.path ? 1 : 0));
  return { bundles, checks };
}

// one section per verification area, in the order they are checked
export const SECTIONS: { id: string; title: string }[] = [
  { id: "kernel-identities", title: "1. Kernel identities" },
  { id: "propagator-exactness", title: "2. Propagator exactness" },
  { id: "elliptic-solve", title: "3. Screened elliptic solve" },
  { id: "convolution-estimates", title: "4. Kernel convolution estimates" },
  { id: "interaction-estimates", title: "5. Interaction-slice estimates" },
  { id: "solver-oracle-agreement", title: "6. Solver vs. oracle" },
  { id: "suppression-by-shear", title: "7. Suppression by shear" },
  { id: "decay-rates", title: "8. Decay rates" },
  { id: "report-pipeline", title: "9. Report inputs" },
];

function num(v: unknown, digits = 6): string {
  if (typeof v !== "number" || !Number.isFinite(v)) {
    return String(v);
  }
  return v.toPrecision(digits).replace(/(\.\d*?)0+(?=$|e)/, "$1").replace(/\.$/, "");
}

function table(headers: string[], rows: string[][]): string {
  const head = headers.map((h) => `<th>${h}</th>`).join("");
  const body = rows
    .map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`)
    .join("\n");
  return `<table>\n<tr>${head}</tr>\n${body}\n</table>`;
}

const EMPTY = "<p>no artifacts for this check in the supplied inputs.</p>";

function checksTable(entries: CheckEntry[]): string {
  return table(
    ["check", "cases", "sup ratio", "verdict"],
    entries.map((e) => [
      e.lemma,
      String(e.n_cases ?? ""),
      num(e.sup_ratio),
      e.passed === false ? "FAIL" : e.passed === true ? "PASS" : "",
    ]),
  );
}

function isOracle(b: RunBundle): boolean {
  return typeof b.summary.mode === "string";
}

function suppressionSection(runs: RunBundle[]): string {
  if (runs.length === 0) {
    return EMPTY;
  }
  const rows = runs.map((b) => {
    const s = b.summary;
    return [
      b.name,
      num(s.A as number),
      String(s.epsilon),
      s.blowup ? "yes" : "no",
      s.blowup_time == null ? "-" : num(s.blowup_time as number),
      num(s.t_reached as number),
      num(s.final_linf as number),
      num(s.mass_drift as number, 3),
    ];
  });
  const parts = [
    table(
      ["run", "A", "eps", "blow-up", "trigger time", "t reached", "final sup", "mass drift"],
      rows,
    ),
  ];
  for (const b of runs) {
    if (b.snapshotBases.length > 0) {
      const base = b.snapshotBases[b.snapshotBases.length - 1];
      const snap = readSnapshot(base);
      parts.push(`<h3>${b.name}: final snapshot</h3>`);
      parts.push(plotField(snap, "sheared", `${b.name} sheared, t=${num(snap.time, 4)}`));
      if (snap.shape.length === 2) {
        parts.push(plotField(snap, "lab", `${b.name} lab, t=${num(snap.time, 4)}`));
        const tiltDeg = (principalTilt(toLab(snap)) * 180) / Math.PI;
        const At = (snap.A as number) * snap.time;
        const ridgeDeg = (Math.atan2(2, At) * 180) / Math.PI;
        parts.push(
          `<p>principal-axis tilt ${num(tiltDeg, 4)}&deg; vs. ridge angle arctan(2/(A t)) = ${num(ridgeDeg, 4)}&deg; at A t = ${num(At, 4)}</p>`,
        );
      }
    }
  }
  return parts.join("\n");
}

function decaySection(runs: RunBundle[]): string {
  if (runs.length === 0) {
    return EMPTY;
  }
  const parts: string[] = [];
  for (const b of runs) {
    let fig: DecayFigure;
    try {
      fig = plotDecay(b.diagnostics, b.summary);
    } catch (err) {
      parts.push(`<p>${b.name}: ${(err as Error).message}</p>`);
      continue;
    }
    parts.push(`<h3>${b.name}</h3>`);
    parts.push(fig.svg);
    parts.push(
      `<p>envelope constants: L2 ${num(fig.anchorL2, 4)}, Linf ${num(fig.anchorLinf, 4)}; regime boundary t = ${num(fig.tBreak, 4)}</p>`,
    );
  }
  return parts.join("\n");
}

function oracleSection(runs: RunBundle[]): string {
  if (runs.length === 0) {
    return EMPTY;
  }
  return table(
    ["run", "mode", "iterations", "error estimate", "t reached"],
    runs.map((b) => [
      b.name,
      String(b.summary.mode),
      String(b.summary.iterations ?? "-"),
      num(b.summary.error_estimate as number, 3),
      num(b.summary.t_reached as number),
    ]),
  );
}

function inputsSection(inputs: Inputs): string {
  const rows: string[][] = [];
  for (const b of inputs.bundles) {
    rows.push([b.dir, "run bundle", `${b.diagnostics.rows.length} diagnostic rows, ${b.snapshotBases.length} snapshots`]);
  }
  for (const c of inputs.checks) {
    rows.push([c.path, "check report", `${c.entries.length} checks`]);
  }
  if (rows.length === 0) {
    return EMPTY;
  }
  return table(["path", "kind", "contents"], rows);
}

export function renderReport(inputs: Inputs): string {
  const { bundles, checks } = inputs;
  const runs = bundles.filter((b) => !isOracle(b));
  const oracles = bundles.filter(isOracle);
  const initEntries: CheckEntry[] = [];
  const sliceEntries: CheckEntry[] = [];
  for (const c of checks) {
    for (const e of c.entries) {
      (e.lemma === "init" ? initEntries : sliceEntries).push(e);
    }
  }

  const content: Record<string, string> = {
    "kernel-identities":
      runs.length === 0
        ? EMPTY
        : table(
            ["run", "A", "theta", "gamma", "box"],
            runs.map((b) => [
              b.name,
              num(b.summary.A),
              num(b.summary.theta),
              num(b.summary.gamma),
              (b.summary.box ?? []).map((v) => num(v, 4)).join(" x "),
            ]),
          ),
    "propagator-exactness": EMPTY,
    "elliptic-solve": EMPTY,
    "convolution-estimates":
      initEntries.length === 0 ? EMPTY : checksTable(initEntries),
    "interaction-estimates":
      sliceEntries.length === 0 ? EMPTY : checksTable(sliceEntries),
    "solver-oracle-agreement": oracleSection(oracles),
    "suppression-by-shear": suppressionSection(runs),
    "decay-rates": decaySection(runs),
    "report-pipeline": inputsSection(inputs),
  };

  const parts: string[] = [];
  parts.push("<!DOCTYPE html>");
  parts.push('<html lang="en"><head><meta charset="utf-8">');
  parts.push("<title>shear-suppression lab report</title>");
  parts.push(
    "<style>body{font-family:sans-serif;max-width:900px;margin:2em auto;padding:0 1em}" +
      "table{border-collapse:collapse;margin:0.8em 0}" +
      "td,th{border:1px solid #999;padding:3px 8px;font-size:13px}" +
      "svg{margin:0.5em 0}</style>",
  );
  parts.push("</head><body>");
  parts.push("<h1>shear-suppression lab report</h1>");
  if (bundles.length === 0 && checks.length === 0) {
    parts.push('<p class="notice">no runs supplied; nothing to report.</p>');
  }
  for (const sec of SECTIONS) {
    parts.push(`<section id="${sec.id}">`);
    parts.push(`<h2>${sec.title}</h2>`);
    parts.push(content[sec.id]);
    parts.push("</section>");
  }
  parts.push("</body></html>");
  return parts.join("\n");
}
