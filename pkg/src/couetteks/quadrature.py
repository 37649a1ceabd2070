"""Quadrature building blocks shared by the oracle and the inequality lab.

Two kinds of tools live here: panelised Gauss-Legendre rules (optionally
graded toward an integrable endpoint singularity), and closed forms for
1-D and 2-D integrals of Gaussians against the Gaussian-plus-exponential
envelope factors.  The closed forms use the scaled complementary error
function so they stay finite across the full dynamic range of A t.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfcx

_SQRT_PI = math.sqrt(math.pi)


def gauss_panels(a, b, n_panels, n_nodes=6, grade="none"):
    """Composite Gauss-Legendre nodes/weights on [a, b].

    ``grade`` clusters panel edges cubically toward an endpoint carrying
    an integrable singularity: "left", "right", "both" or "none".
    """
    if b <= a:
        return np.empty(0), np.empty(0)
    s = np.linspace(0.0, 1.0, n_panels + 1)
    if grade == "left":
        edges = a + (b - a) * s**3
    elif grade == "right":
        edges = b - (b - a) * (1.0 - s) ** 3
    elif grade == "both":
        edges = a + (b - a) * (3.0 * s**2 - 2.0 * s**3)
    else:
        edges = a + (b - a) * s
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def merged_intervals(intervals):
    """Union of closed intervals as a sorted, disjoint list."""
    ivs = sorted((lo, hi) for lo, hi in intervals if hi > lo)
    merged = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return merged


def covering_nodes(intervals, n_panels=6, n_nodes=8):
    """Gauss nodes covering the union of the given intervals."""
    nodes, weights = [], []
    for lo, hi in merged_intervals(intervals):
        x, w = gauss_panels(lo, hi, n_panels, n_nodes)
        nodes.append(x)
        weights.append(w)
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


# ---------------------------------------------------------------------------
# closed forms: integrals over u of exp(-(u - mu)^2 / (4 a)) times a factor


def int_gauss(a):
    """integral of exp(-(u - mu)^2 / (4a)) du."""
    return 2.0 * np.sqrt(math.pi * a)


def int_gauss_gauss(mu, a, b):
    """Against exp(-u^2 / b)."""
    return np.sqrt(4.0 * math.pi * a * b / (4.0 * a + b)) * np.exp(
        -(mu * mu) / (4.0 * a + b)
    )


def _erfcx_pair(mu, a, L):
    mu = np.asarray(mu, dtype=float)
    a = np.asarray(a, dtype=float)
    ra = np.sqrt(a)
    sp = ra / L - mu / (2.0 * ra)
    sm = ra / L + mu / (2.0 * ra)
    damp = np.exp(-(mu * mu) / (4.0 * a))
    # For strongly negative arguments erfcx overflows; fold the reflection
    # erfcx(-s) = 2 exp(s^2) - erfcx(s) into the Gaussian damping, where it
    # collapses to the bounded factor exp(a/L^2 -+ mu/L).
    with np.errstate(over="ignore", invalid="ignore"):
        plus = np.where(
            sp < -25.0,
            2.0 * np.exp(a / (L * L) - mu / L) - damp * erfcx(np.abs(sp)),
            damp * erfcx(sp),
        )
        minus = np.where(
            sm < -25.0,
            2.0 * np.exp(a / (L * L) + mu / L) - damp * erfcx(np.abs(sm)),
            damp * erfcx(sm),
        )
    return _SQRT_PI * ra * plus, _SQRT_PI * ra * minus


def int_gauss_absexp(mu, a, L):
    """Against exp(-|u| / L)."""
    plus, minus = _erfcx_pair(mu, a, L)
    return plus + minus


def int_gauss_signexp(mu, a, L):
    """Against sign(u) exp(-|u| / L); odd in mu."""
    plus, minus = _erfcx_pair(mu, a, L)
    return plus - minus


def int_gauss_envelope(mu, a, b_gauss, L_exp):
    """Against the two-piece envelope exp(-u^2/b) + exp(-|u|/L)."""
    return int_gauss_gauss(mu, a, b_gauss) + int_gauss_absexp(mu, a, L_exp)


def int_gauss2d(p, q, r, bu, bv, c):
    """integral over R^2 of exp(-(p u^2 + q v^2 + r u v - bu u - bv v + c)).

    Requires the quadratic form to be positive definite.
    """
    det = 4.0 * p * q - r * r
    quad = (q * bu * bu + p * bv * bv - r * bu * bv) / det
    return 2.0 * math.pi / np.sqrt(det) * np.exp(quad - c)
