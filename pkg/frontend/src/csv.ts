// csv.ts
//
// Reader for the diagnostics tables written by the solver: a header line
// of comma-separated column names followed by numeric rows.

export type Table = {
  columns: string[];
  rows: number[][];
};

export function parseDiagnostics(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim() !== "");
  if (lines.length === 0) {
    throw new Error("diagnostics file is empty");
  }
  const columns = lines[0].split(",").map((s) => s.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const vals = lines[i].split(",").map((s) => Number(s.trim()));
    if (vals.length !== columns.length) {
      throw new Error(
        `diagnostics row ${i} has ${vals.length} fields, expected ${columns.length}`,
      );
    }
    rows.push(vals);
  }
  if (rows.length === 0) {
    throw new Error("diagnostics file has a header but no data rows");
  }
  return { columns, rows };
}

export function column(tab: Table, name: string): number[] {
  const i = tab.columns.indexOf(name);
  if (i < 0) {
    throw new Error(`diagnostics missing column '${name}'`);
  }
  return tab.rows.map((r) => r[i]);
}
