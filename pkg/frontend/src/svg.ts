// svg.ts
//
// Hand-built deterministic SVG figures: a log-log line plot and a grid
// heat map.  No timestamps, no randomness, fixed numeric formatting, so
// identical inputs produce byte-identical markup.

export type Series = {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dash?: string;
};

export type Marker = {
  x: number;
  label: string;
};

const W = 560;
const H = 360;
const ML = 60;
const MR = 16;
const MT = 28;
const MB = 44;

function fmt(v: number): string {
  return v.toFixed(2);
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo - 1e-9); e <= Math.floor(hi + 1e-9); e++) {
    ticks.push(e);
  }
  return ticks;
}

function tickLabel(e: number): string {
  return e === 0 ? "1" : `1e${e}`;
}

/** Log-log line plot with optional vertical markers (drawn at x values). */
export function logLogPlot(
  title: string,
  series: Series[],
  markers: Marker[] = [],
): string {
  let xmin = Infinity;
  let xmax = -Infinity;
  let ymin = Infinity;
  let ymax = -Infinity;
  for (const s of series) {
    for (let i = 0; i < s.x.length; i++) {
      const x = s.x[i];
      const y = s.y[i];
      if (x > 0 && y > 0 && Number.isFinite(x) && Number.isFinite(y)) {
        xmin = Math.min(xmin, x);
        xmax = Math.max(xmax, x);
        ymin = Math.min(ymin, y);
        ymax = Math.max(ymax, y);
      }
    }
  }
  for (const m of markers) {
    if (m.x > 0 && Number.isFinite(m.x)) {
      xmin = Math.min(xmin, m.x);
      xmax = Math.max(xmax, m.x);
    }
  }
  if (!(xmin < xmax) || !(ymin <= ymax)) {
    throw new Error(`figure '${title}' has no positive finite data`);
  }
  const lx0 = Math.log10(xmin);
  const lx1 = Math.log10(xmax);
  const ly0 = Math.log10(ymin) - 0.05;
  const ly1 = Math.log10(ymax) + 0.05;
  const px = (x: number) =>
    ML + ((Math.log10(x) - lx0) / (lx1 - lx0)) * (W - ML - MR);
  const py = (y: number) =>
    H - MB - ((Math.log10(y) - ly0) / (ly1 - ly0)) * (H - MT - MB);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="sans-serif" font-size="11">`,
  );
  parts.push(
    `<rect x="${ML}" y="${MT}" width="${W - ML - MR}" height="${H - MT - MB}" fill="none" stroke="#333"/>`,
  );
  parts.push(
    `<text x="${fmt(W / 2)}" y="16" text-anchor="middle" font-size="13">${title}</text>`,
  );
  for (const e of decadeTicks(lx0, lx1)) {
    const x = px(Math.pow(10, e));
    parts.push(
      `<line x1="${fmt(x)}" y1="${MT}" x2="${fmt(x)}" y2="${H - MB}" stroke="#ddd"/>`,
    );
    parts.push(
      `<text x="${fmt(x)}" y="${H - MB + 16}" text-anchor="middle">${tickLabel(e)}</text>`,
    );
  }
  for (const e of decadeTicks(ly0, ly1)) {
    const y = py(Math.pow(10, e));
    parts.push(
      `<line x1="${ML}" y1="${fmt(y)}" x2="${W - MR}" y2="${fmt(y)}" stroke="#ddd"/>`,
    );
    parts.push(
      `<text x="${ML - 6}" y="${fmt(y + 4)}" text-anchor="end">${tickLabel(e)}</text>`,
    );
  }
  for (const m of markers) {
    const x = px(m.x);
    parts.push(
      `<line class="marker" x1="${fmt(x)}" y1="${MT}" x2="${fmt(x)}" y2="${H - MB}" stroke="#888" stroke-dasharray="2 3"/>`,
    );
    parts.push(
      `<text x="${fmt(x + 3)}" y="${MT + 12}" fill="#555">${m.label}</text>`,
    );
  }
  let li = 0;
  for (const s of series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      if (s.x[i] > 0 && s.y[i] > 0 && Number.isFinite(s.y[i])) {
        pts.push(`${fmt(px(s.x[i]))},${fmt(py(s.y[i]))}`);
      }
    }
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(
      `<polyline fill="none" stroke="${s.color}"${dash} points="${pts.join(" ")}"/>`,
    );
    parts.push(
      `<text x="${W - MR - 6}" y="${MT + 14 + 13 * li}" text-anchor="end" fill="${s.color}">${s.label}</text>`,
    );
    li += 1;
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Grayscale heat map of a 2-D grid (C order, index ix * ny + iy). */
export function heatMap(
  title: string,
  values: ArrayLike<number>,
  nx: number,
  ny: number,
): string {
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  const span = hi - lo;
  const side = 320;
  const cw = side / nx;
  const ch = side / ny;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${side}" height="${side + 24}" viewBox="0 0 ${side} ${side + 24}" font-family="sans-serif" font-size="11">`,
  );
  parts.push(
    `<text x="${fmt(side / 2)}" y="14" text-anchor="middle" font-size="12">${title}</text>`,
  );
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      // x rightward, y upward
      const v = values[i * ny + j];
      const g =
        span > 0 && Number.isFinite(v)
          ? Math.round(255 * (1 - (v - lo) / span))
          : 128;
      parts.push(
        `<rect x="${fmt(i * cw)}" y="${fmt(24 + (ny - 1 - j) * ch)}" width="${fmt(cw + 0.5)}" height="${fmt(ch + 0.5)}" fill="rgb(${g},${g},${g})"/>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("\n");
}
