// decay.ts
//
// Norm-decay figure for one run bundle: measured L2 and L-inf curves on
// log-log axes, overlaid with the decay envelope (periodized to the run's
// box) scaled by the smallest constant that majorizes each curve past the
// first regime boundary.  Regime boundaries t = A^(-theta) and t = 1 are
// marked.

import { Table, column } from "./csv.js";
import {
  EnvelopeParams,
  envelopeA,
  periodizationFactor,
  regimeBreak,
} from "./envelope.js";
import { Marker, Series, logLogPlot } from "./svg.js";

export type DecayFigure = {
  svg: string;
  t: number[];
  l2: number[];
  linf: number[];
  overlayT: number[];
  overlayL2: number[];
  overlayLinf: number[];
  anchorL2: number;
  anchorLinf: number;
  tBreak: number;
};

export type RunSummary = {
  A: number;
  theta: number;
  gamma: number;
  box?: number[];
  [key: string]: unknown;
};

function basisCurve(t: number[], p: EnvelopeParams, box?: number[]): number[] {
  return t.map((ti) => {
    const env = envelopeA(ti, p);
    return box && box.length > 0
      ? env * periodizationFactor(ti, p.A, box)
      : env;
  });
}

export function plotDecay(diagnostics: Table, summary: RunSummary): DecayFigure {
  const p: EnvelopeParams = {
    A: summary.A,
    theta: summary.theta,
    gamma: summary.gamma,
  };
  const t = column(diagnostics, "t");
  const l2 = column(diagnostics, "l2");
  const linf = column(diagnostics, "linf");
  const tBreak = regimeBreak(p);

  // overlay region: past the first regime boundary (all positive times if
  // the boundary is never crossed, e.g. A = 0)
  let idx: number[] = [];
  for (let i = 0; i < t.length; i++) {
    if (t[i] > tBreak) {
      idx.push(i);
    }
  }
  if (idx.length === 0) {
    idx = t.map((_, i) => i).filter((i) => t[i] > 0);
  }
  if (idx.length === 0) {
    throw new Error("decay figure needs samples at positive times");
  }
  const overlayT = idx.map((i) => t[i]);
  const basis = basisCurve(overlayT, p, summary.box);
  let anchorL2 = 0;
  let anchorLinf = 0;
  for (let k = 0; k < idx.length; k++) {
    const i = idx[k];
    if (Number.isFinite(l2[i])) {
      anchorL2 = Math.max(anchorL2, l2[i] / basis[k]);
    }
    if (Number.isFinite(linf[i])) {
      anchorLinf = Math.max(anchorLinf, linf[i] / basis[k]);
    }
  }
  const overlayL2 = basis.map((b) => anchorL2 * b);
  const overlayLinf = basis.map((b) => anchorLinf * b);

  const series: Series[] = [
    { label: "L2", x: t, y: l2, color: "#1f77b4" },
    { label: "Linf", x: t, y: linf, color: "#d62728" },
    {
      label: "envelope (L2)",
      x: overlayT,
      y: overlayL2,
      color: "#1f77b4",
      dash: "5 3",
    },
    {
      label: "envelope (Linf)",
      x: overlayT,
      y: overlayLinf,
      color: "#d62728",
      dash: "5 3",
    },
  ];
  const markers: Marker[] = [];
  if (Number.isFinite(tBreak)) {
    markers.push({ x: tBreak, label: "t=A^-theta" });
  }
  markers.push({ x: 1, label: "t=1" });
  const svg = logLogPlot(`norm decay, A=${summary.A}`, series, markers);
  return {
    svg,
    t,
    l2,
    linf,
    overlayT,
    overlayL2,
    overlayLinf,
    anchorL2,
    anchorLinf,
    tBreak,
  };
}
