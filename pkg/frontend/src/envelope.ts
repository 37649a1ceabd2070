// envelope.ts
//
// Three-regime time-decay majorant for the suppressed density, plus the
// box-periodization factor used when comparing against runs on a finite
// periodic box.  Mirrors the conventions of the simulation package so the
// overlay drawn here is the same curve the solver diagnostics are measured
// against: regimes split at t = A^(-theta) and t = 1, ties going to the
// earlier branch.

export type EnvelopeParams = {
  A: number;
  theta: number;
  gamma: number;
};

/** Early/intermediate regime boundary t = A^(-theta). */
export function regimeBreak(p: EnvelopeParams): number {
  return p.A > 0 ? Math.pow(p.A, -p.theta) : Infinity;
}

/** Three-regime decay majorant of the density amplitude. */
export function envelopeA(t: number, p: EnvelopeParams): number {
  if (!(t > 0)) {
    throw new Error("envelope requires t > 0");
  }
  const { A, gamma: g } = p;
  const tb = regimeBreak(p);
  const pre = A > 0 ? Math.pow(A, -(1 - p.theta) * g) : 1;
  if (t <= tb) {
    return 1;
  }
  if (t <= 1) {
    return (
      pre *
      Math.pow(t, -0.25 - g / 4) *
      Math.pow(1 + A * A * t * t, -0.25 + g / 4)
    );
  }
  return (
    pre * Math.pow(1 + t, -1.5) * Math.pow(1 + A * A * t * t, -0.5 + g / 2)
  );
}

/** Late-time cut-off: 0 on (0, 1], 1 beyond. */
export function chi(t: number): number {
  return t > 1 ? 1 : 0;
}

// one periodic axis: image sum of a Gaussian core (variance scale b) plus an
// exponential tail (length scale Le), averaged.  kmax covers both tails.
function axisFactor(L: number, b: number, Le: number): number {
  const kmax = Math.floor(Math.max(6 * Math.sqrt(b), 25 * Le) / L) + 2;
  let gauss = 1;
  let expo = 1;
  for (let k = 1; k <= kmax; k++) {
    const kL = k * L;
    gauss += 2 * Math.exp((-kL * kL) / b);
    expo += 2 * Math.exp(-kL / Le);
  }
  return (gauss + expo) / 2;
}

/**
 * Peak boost of the travelling pattern under box periodization.  The x axis
 * spreads like sqrt(Cprime * t * (1 + A^2 t^2)) with exponential tail length
 * Cprime * (1 + A t); transverse axes spread diffusively.
 */
export function periodizationFactor(
  t: number,
  A: number,
  box: number[],
  Cprime = 60,
  Cdblprime = 60,
): number {
  if (!(t > 0) || box.length < 1) {
    throw new Error("periodization factor requires t > 0 and a box");
  }
  const att = 1 + A * A * t * t;
  let f = axisFactor(box[0], Cprime * t * att, Cprime * (1 + A * t));
  for (let i = 1; i < box.length; i++) {
    f *= axisFactor(box[i], Cdblprime * t, Cdblprime);
  }
  return f;
}
