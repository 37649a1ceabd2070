"""Numerical lab for the pointwise kernel/envelope inequalities.

Each check evaluates the left side of one convolution estimate by
quadrature -- erfcx-based closed forms wherever a Gaussian meets the
two-piece Gaussian-plus-exponential envelope, feature-refined Gauss
panels elsewhere -- and compares it against the claimed majorant at
points on and off the shear characteristic x = (A t / 2) y.

Pass criteria are deliberately structural: ratios must stay finite,
suprema must be stable across the groups where the claim is uniform,
and fitted scaling exponents must land on their predicted values.  No
O(1) constant is ever pinned to a numeric target.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import load_config
from .kernels import (
    EnvelopeParams,
    WaveParams,
    envelope_A,
    envelope_A1,
    envelope_A2,
    envelope_A3,
    wave_Wo,
    wave_Wx,
    wave_scriptW,
    wave_scriptW_2d,
)
from .quadrature import (
    gauss_panels,
    int_gauss_absexp,
    int_gauss_envelope,
    int_gauss_gauss,
    int_gauss_signexp,
)

RATIO_SPREAD_CAP = 8.0
FIT_WIDEN = 0.15

INIT_ESTIMATES = ("kernel", "dx", "dy", "dz")
SLICE_IDS = ("early", "mid", "late", "damped-mid", "damped-late")
PLANE_KINDS = ("plane-gg", "plane-ee", "plane-ge", "plane-eg")


# ---------------------------------------------------------------------------
# report containers


@dataclass
class InequalityCase:
    """One evaluation of a bound: left side, right side, their ratio."""

    check: str
    estimate: str
    params: dict
    lhs: float
    rhs: float
    regime: str

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs


@dataclass
class ExponentFit:
    """A fitted log-log slope against its predicted value."""

    name: str
    slope: float
    target: float
    tol: float
    ci: float  # 95% halfwidth of the slope estimate

    @property
    def ok(self) -> bool:
        return abs(self.slope - self.target) <= self.tol + self.ci


@dataclass
class LemmaReport:
    """Aggregate of one check: cases, sups, exponent fits, pass flags."""

    check: str
    cases: list
    fits: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    band_sups: dict = field(default_factory=dict)
    band_cap: float | None = None
    notes: str = ""

    @property
    def sup_ratio(self) -> float:
        return max((c.ratio for c in self.cases), default=0.0)

    @property
    def regime_sups(self) -> dict:
        sups = {}
        for c in self.cases:
            sups[c.regime] = max(sups.get(c.regime, 0.0), c.ratio)
        return sups

    @property
    def band_ok(self) -> bool:
        if self.band_cap is None:
            return True
        vals = [v for v in self.band_sups.values() if v > 0.0]
        if len(vals) < 2:
            return True
        return max(vals) <= self.band_cap * min(vals)

    @property
    def passed(self) -> bool:
        return (
            math.isfinite(self.sup_ratio)
            and all(f.ok for f in self.fits)
            and all(bool(v) for v in self.flags.values())
            and self.band_ok
        )


def fit_powerlaw(xs, ys):
    """Least-squares slope of log ys against log xs, with 95% halfwidth."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    n = len(lx)
    X = np.column_stack([np.ones(n), lx])
    coef, *_ = np.linalg.lstsq(X, ly, rcond=None)
    resid = ly - X @ coef
    dof = max(n - 2, 1)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    ci = 1.96 * math.sqrt(float(resid @ resid) / dof / sxx) if sxx > 0 else math.inf
    return float(coef[1]), ci


# ---------------------------------------------------------------------------
# feature-refined 1-D quadrature


_MULTS = np.array(
    [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 40.0]
)
_GAUSS_CACHE: dict = {}


def _leggauss(n):
    if n not in _GAUSS_CACHE:
        _GAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GAUSS_CACHE[n]


def _feature_nodes(features, lo, hi, n_nodes=6):
    """Gauss nodes on [lo, hi], panel edges clustered near each feature.

    ``features`` is a list of (center, scale) pairs; edges are laid at
    graded multiples of each scale so every local structure is resolved
    regardless of how disparate the scales are.
    """
    if hi <= lo:
        return np.empty(0), np.empty(0)
    edges = [lo, hi]
    for cen, sc in features:
        if not (sc > 0.0 and math.isfinite(sc)):
            continue
        offs = _MULTS * sc
        edges.extend((cen + offs).tolist())
        edges.extend((cen - offs).tolist())
    e = np.unique([v for v in edges if lo <= v <= hi])
    keep = np.concatenate([[True], np.diff(e) > 1e-12 * (hi - lo)])
    e = e[keep]
    if len(e) < 2:
        e = np.array([lo, hi])
    xg, wg = _leggauss(n_nodes)
    half = 0.5 * np.diff(e)
    mid = 0.5 * (e[:-1] + e[1:])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _eval_points(t, A, xg, yg, zg=None, mults=(2.0, 4.0)):
    """Core of the shear characteristic plus a few widths off-core."""
    pts = [(0.0, 0.0, 0.0)]
    for m in mults:
        pts.append((m * xg, 0.0, 0.0))
    y1 = mults[0] * yg
    pts.append((0.5 * A * t * y1, y1, 0.0))
    if zg is not None:
        pts.append((0.0, 0.0, mults[0] * zg))
    return pts


def _eval_points_dense(t, A, xg, yg):
    """Fuller grid of characteristic-aligned offsets (for sup hunting)."""
    pts = []
    for fy in (0.0, 1.0, 2.0):
        y = fy * yg
        for fx in (0.0, 0.3, 0.7, 1.5, 3.0):
            x = 0.5 * A * t * y + fx * xg
            for fz in (0.0, 1.0):
                pts.append((x, y, fz * yg))
    return pts


# ---------------------------------------------------------------------------
# initial propagation of exponentially localized data


def _init_lhs(estimate, x, y, z, t, A, Cstar):
    """Triple convolution of the kernel (or a source derivative) with
    exp(-(|x0|+|y0|+|z0|)/C*): closed forms in x0 and z0, feature-refined
    quadrature in y0."""
    s = 1.0 + A * A * t * t / 12.0
    pref = (4.0 * math.pi * t) ** -1.5 / math.sqrt(s)
    ax = t * s
    if estimate == "dz":
        zfac = int_gauss_signexp(z, t, Cstar) / Cstar
    else:
        zfac = int_gauss_absexp(z, t, Cstar)

    sy = math.sqrt(t)
    lo = max(y - 45.0 * sy, -95.0 * Cstar)
    hi = min(y + 45.0 * sy, 95.0 * Cstar)
    if hi <= lo:
        return 0.0
    features = [(y, sy), (0.0, Cstar)]
    if A * t > 0.0:
        wid = 2.0 * max(2.0 * math.sqrt(ax), Cstar) / (A * t)
        features.append((2.0 * x / (A * t) - y, wid))
    v, w = _feature_nodes(features, lo, hi)
    gy = np.exp(-((y - v) ** 2) / (4.0 * t))
    ey = np.exp(-np.abs(v) / Cstar)
    mu = x - 0.5 * A * t * (y + v)
    if estimate == "kernel":
        integ = gy * ey * int_gauss_absexp(mu, ax, Cstar)
    elif estimate == "dx":
        integ = gy * ey * int_gauss_signexp(mu, ax, Cstar) / Cstar
    elif estimate == "dz":
        integ = gy * ey * int_gauss_absexp(mu, ax, Cstar)
    elif estimate == "dy":
        # derivative in the source ordinate hits both the y-Gaussian and,
        # through the characteristic shift, the x-Gaussian
        term_y = (y - v) / (2.0 * t) * int_gauss_absexp(mu, ax, Cstar)
        term_x = 0.5 * A * t * int_gauss_signexp(mu, ax, Cstar) / Cstar
        integ = gy * ey * (term_y + term_x)
    else:
        raise ValueError(f"unknown estimate {estimate!r}")
    return abs(pref * zfac * float(np.sum(w * integ)))


def _init_rhs(estimate, x, y, z, t, A, beta, Cstar, C1):
    att = 1.0 + A * A * t * t
    if estimate == "kernel":
        amp = t ** (-0.5 + beta) * (1.0 + t) ** (-1.0 - beta) * att ** (-0.5 + beta)
        wx, wy, wz = 16.0, 9.0, 9.0
    elif estimate == "dx":
        amp = t ** (-1.0 + beta) * (1.0 + t) ** (-1.0 - beta) * att ** (-1.0 + beta)
        wx, wy, wz = 16.0 * C1, 9.0, 9.0
    elif estimate == "dy":
        amp = t ** (-1.0 + beta) * (1.0 + t) ** (-1.0 - beta) * att ** (-0.5 + beta)
        wx, wy, wz = 16.0 * C1, 9.0 * C1, 9.0
    else:  # dz
        amp = t ** (-1.0 + beta) * (1.0 + t) ** (-1.0 - beta) * att ** (-0.5 + beta)
        wx, wy, wz = 16.0, 9.0, 9.0 * C1
    return (
        amp
        * wave_Wx(x, y, t, wx, 6.0 * Cstar, A)
        * wave_Wo(y, t, wy, 9.0 * Cstar)
        * wave_Wo(z, t, wz, 4.0 * Cstar)
    )


def _time_band(t, A):
    """Coarse time bands for the non-piecewise bounds: shear-free,
    shear-active, late."""
    if t <= min(1.0, 1.0 / A if A > 0 else 1.0):
        return "early"
    if t <= 1.0:
        return "mid"
    return "late"


def check_initial_propagation(
    beta,
    A_values=(1.0, 10.0, 100.0),
    t_values=None,
    Cstar=1.0,
    C1=2.0,
):
    """All four initial-propagation estimates at one interpolation beta.

    The ratio band is enforced per estimate *across time regimes*: each
    fixed-beta bound is tight near the regime boundaries and slack deep
    inside a regime (that slack is what the beta-interpolation trades
    away), so the regime sups -- attained at the tight edges -- are the
    O(1)-stable quantities.  The regime split is the piecewise one,
    t = A^(-theta) and t = 1, with theta = 0.8.

    ``Cstar`` sets the data localization scale; the default 1.0 keeps
    the derivative estimates' late-time asymptotics inside the sampled
    window (the data's own smoothness makes their small-t rates slack,
    so the regime sups would otherwise drift apart for a while before
    saturating).
    """
    if not 0.0 <= beta <= 0.5:
        raise ValueError("beta must lie in [0, 1/2]")
    if t_values is None:
        t_values = np.geomspace(0.02, 20.0, 13)
    cases = []
    for A in A_values:
        tb = A ** -0.8 if A > 0 else math.inf
        ts = np.unique(np.concatenate([np.asarray(t_values, float),
                                       [0.9 * tb, 1.0] if tb < 1.0 else [1.0]]))
        for t in ts:
            att = 1.0 + A * A * t * t
            xg = math.sqrt(16.0 * t * att)
            yg = math.sqrt(9.0 * t)
            for (x, y, z) in _eval_points_dense(t, A, xg, yg):
                regime = _regime(t, A, 0.8)
                for est in INIT_ESTIMATES:
                    lhs = _init_lhs(est, x, y, z, t, A, Cstar)
                    rhs = _init_rhs(est, x, y, z, t, A, beta, Cstar, C1)
                    cases.append(
                        InequalityCase(
                            check="init",
                            estimate=est,
                            params={
                                "A": A, "t": t, "beta": beta,
                                "x": x, "y": y, "z": z,
                            },
                            lhs=lhs,
                            rhs=rhs,
                            regime=regime,
                        )
                    )
    # band: per estimate, sups across the three time regimes
    band_sups = {}
    for c in cases:
        key = (c.estimate, c.regime)
        band_sups[key] = max(band_sups.get(key, 0.0), c.ratio)
    band_flags = {}
    for est in INIT_ESTIMATES:
        vals = [v for (e, _), v in band_sups.items() if e == est and v > 0.0]
        band_flags[f"band-{est}"] = bool(
            len(vals) < 2 or max(vals) <= RATIO_SPREAD_CAP * min(vals)
        )
    # the claimed exponential x-tail width is the narrower of the two in
    # circulation; confirm it bounds by checking the ratio does not grow
    # with tail depth (it would if only a wider tail could majorize)
    ok = True
    for A, t in ((10.0, 0.5), (10.0, 2.0)):
        Ltail = 6.0 * Cstar * (1.0 + A * t)
        rs = []
        for m in (3.0, 5.0):
            lhs = _init_lhs("kernel", m * Ltail, 0.0, 0.0, t, A, Cstar)
            rhs = _init_rhs("kernel", m * Ltail, 0.0, 0.0, t, A, beta, Cstar, C1)
            rs.append(lhs / rhs if rhs > 0.0 else math.inf)
        ok = ok and rs[1] <= 1.1 * rs[0] + 1e-300
    band_flags["statement-widths-sufficient"] = bool(ok)
    fits = []
    for A in A_values:
        fits.append(_init_tight_exponent(beta, A, Cstar))
    rep = LemmaReport(
        check="init",
        cases=cases,
        fits=fits,
        flags=band_flags,
        band_sups={f"{e}/{r}": v for (e, r), v in band_sups.items()},
        band_cap=None,
        notes=f"beta={beta}",
    )
    return rep


def _init_tight_exponent(beta, A, Cstar):
    """Local slope of the deflated kernel convolution where the claimed
    envelope is tightest; at that point the slope must equal beta - 1/2."""
    ts = np.geomspace(1e-3, 300.0, 44)
    lhs = np.array(
        [_init_lhs("kernel", 0.0, 0.0, 0.0, t, A, Cstar) for t in ts]
    )
    att = 1.0 + A * A * ts * ts
    deflated = lhs * (1.0 + ts) ** (1.0 + beta) * att ** (0.5 - beta) / 8.0
    tight = deflated * ts ** (0.5 - beta)
    i = int(np.argmax(tight))
    lo, hi = max(0, i - 2), min(len(ts), i + 3)
    slope, ci = fit_powerlaw(ts[lo:hi], deflated[lo:hi])
    return ExponentFit(
        name=f"tight-point slope (A={A:g})",
        slope=slope,
        target=beta - 0.5,
        tol=0.1,
        ci=ci,
    )


# ---------------------------------------------------------------------------
# interaction slices: kernel-shaped Gaussian against the full wave pattern


def _plane_integral(x, y, tau, sigma, A, C1, Cp, Cpp):
    """(x0, y0)-plane part of the interaction integrand, in sheared
    coordinates u = x0 - (A sigma / 2) y0, v = y0; the u-line is closed
    form, the v-line is feature-refined quadrature.

    Takes the kernel age tau and the source age sigma separately (their
    sum is the evaluation time) so corner quadratures can resolve
    tau far below the floating-point granularity of t."""
    t = tau + sigma
    a = C1 * tau * (1.0 + A * A * tau * tau / 12.0)
    X0 = x - 0.5 * A * tau * y
    c = 0.5 * A * t
    bu = Cp * sigma * (1.0 + A * A * sigma * sigma)
    Lu = Cp * (1.0 + A * sigma)
    sy = math.sqrt(C1 * tau)
    henv = max(45.0 * math.sqrt(Cpp * sigma), 95.0 * Cpp)
    lo = max(y - 45.0 * sy, -henv)
    hi = min(y + 45.0 * sy, henv)
    if hi <= lo:
        return 0.0
    features = [(y, sy), (0.0, math.sqrt(Cpp * sigma)), (0.0, Cpp)]
    if c > 0.0:
        su = max(2.0 * math.sqrt(a), math.sqrt(bu), Lu)
        features.append((X0 / c, su / c))
    v, w = _feature_nodes(features, lo, hi)
    gy = np.exp(-((y - v) ** 2) / (4.0 * C1 * tau))
    ev = np.exp(-v * v / (Cpp * sigma)) + np.exp(-np.abs(v) / Cpp)
    iu = int_gauss_envelope(X0 - c * v, a, bu, Lu)
    return float(np.sum(w * gy * ev * iu))


def _interaction_kernel(pt, tau, sigma, A, C1, Cp, Cpp):
    x, y, z = pt
    plane = _plane_integral(x, y, tau, sigma, A, C1, Cp, Cpp)
    zfac = int_gauss_envelope(z, C1 * tau, Cpp * sigma, Cpp)
    return plane * float(zfac)


def _slice_bounds(slice_id, t, A, theta):
    tb = A ** (-theta) if A > 0 else math.inf
    if slice_id == "early":
        return 0.0, min(tb, t)
    if slice_id in ("mid", "damped-mid"):
        return min(tb, t), min(1.0, t)
    return min(1.0, t), t


def _slice_weight(slice_id, sigma, tau, A, gamma, alpha):
    if slice_id in ("early", "mid", "late"):
        w = tau ** -2.0 * (1.0 + A * A * tau * tau / 12.0) ** -0.5
        if slice_id == "mid":
            w *= sigma ** (-0.5 - gamma / 2.0) * (
                1.0 + A * A * sigma * sigma
            ) ** (-0.5 + gamma / 2.0)
        elif slice_id == "late":
            w *= (1.0 + sigma) ** -3.0 * (1.0 + A * A * sigma * sigma) ** (
                -1.0 + gamma
            )
        return w
    w = math.exp(-tau) * tau ** -alpha * (1.0 + A * A * tau * tau) ** -0.5
    if slice_id == "damped-mid":
        w *= sigma ** (-0.25 - gamma / 4.0) * (
            1.0 + A * A * sigma * sigma
        ) ** (-0.25 + gamma / 4.0)
    else:
        w *= (1.0 + sigma) ** -1.5 * (1.0 + A * A * sigma * sigma) ** (
            -0.5 + gamma / 2.0
        )
    return w


def _slice_lhs(pt, t, A, slice_id, theta, gamma, alpha, wave, sigma_panels=32):
    lo, hi = _slice_bounds(slice_id, t, A, theta)
    if hi <= lo:
        return 0.0
    if hi == t:
        # substitute w = sqrt(t - sigma): the tau^{-1/2} corner of the
        # integrand (kernel mass against the tau^{-2} weight) becomes
        # smooth, with grading absorbing the remaining fractional cusp
        # mid slices are steep at sigma = lo (w = wmax); the early slice
        # has a sqrt(sigma) cusp there from the source's Gaussian mass
        grade = "left" if slice_id in ("late", "damped-late") else "both"
        wn, ww = gauss_panels(0.0, math.sqrt(hi - lo), sigma_panels, 6, grade)
        taus = wn * wn
        sigmas = t - taus
        w = 2.0 * wn * ww
    else:
        grade = "left"
        sigmas, w = gauss_panels(lo, hi, sigma_panels, 6, grade)
        taus = t - sigmas
    total = 0.0
    for sg, tau, wg in zip(sigmas, taus, w):
        wt = _slice_weight(slice_id, sg, tau, A, gamma, alpha)
        total += wg * wt * _interaction_kernel(
            pt, tau, sg, A, wave.C1, wave.Cprime, wave.Cdblprime
        )
    return total


def _slice_amp(slice_id, t, A, theta, gamma, alpha):
    if slice_id in ("early", "mid", "damped-mid"):
        env = EnvelopeParams(A=A, theta=theta, gamma=gamma)
        if slice_id == "early":
            return float(envelope_A1(t, env))
        if slice_id == "mid":
            return float(envelope_A2(t, env))
        return float(envelope_A3(t, alpha, env))
    if slice_id == "late":
        return (1.0 + t) ** -2.0 * (1.0 + A * A * t * t) ** -0.5
    return (
        math.exp(-t / 2.0) * (1.0 + t) ** (1.0 - alpha) + (1.0 + t) ** -1.5
    ) * (1.0 + A * A * t * t) ** (-0.5 + gamma / 2.0)


def check_interaction(
    slice_id,
    A_values=(1.0, 10.0, 100.0),
    t_values=None,
    theta=0.8,
    gamma=0.25,
    alpha=1.75,
    wave=None,
):
    """One sigma-slice of the Duhamel interaction integral against its
    three-regime majorant.

    Per-regime sup ratios are reported but not gated: each regime's
    ratio saturates a different width-dependent constant (the late
    regime carries the full source mass, growing with Cprime and
    Cdblprime, while the early regime only feels mass at scale t), so a
    fixed cross-regime band is not a property these bounds have.  Pass
    is finiteness plus the slice's scaling law.
    """
    if slice_id not in SLICE_IDS:
        raise ValueError(f"unknown slice {slice_id!r}")
    wave = wave or WaveParams()
    if not wave.check_interaction_constraints():
        raise ValueError("wave widths violate the interaction constraints")
    Cp, Cpp = wave.Cprime, wave.Cdblprime
    cases = []
    late_only = slice_id in ("late", "damped-late")
    for A in A_values:
        tb = A ** -theta if A > 0 else math.inf
        if t_values is not None:
            ts = np.asarray(t_values, dtype=float)
        elif late_only:
            ts = np.array([1.5, 3.0, 8.0, 20.0])
        else:
            ts = np.unique(
                np.concatenate(
                    [np.geomspace(5e-3, 20.0, 9), [0.3 * tb, tb, 2.0 * tb]]
                )
            )
        for t in ts:
            att = 1.0 + A * A * t * t
            xg = math.sqrt(1.5 * Cp * t * att)
            yg = math.sqrt(1.5 * Cpp * t)
            for pt in _eval_points(t, A, xg, yg, yg, mults=(2.0, 4.0))[:4]:
                lhs = _slice_lhs(pt, t, A, slice_id, theta, gamma, alpha, wave)
                rhs = _slice_amp(slice_id, t, A, theta, gamma, alpha) * float(
                    wave_scriptW(pt[0], pt[1], pt[2], t, 1.5 * Cp, 1.5 * Cpp, A)
                )
                regime = "zero" if rhs == 0.0 and lhs == 0.0 else _regime(t, A, theta)
                cases.append(
                    InequalityCase(
                        check=slice_id,
                        estimate="",
                        params={
                            "A": A, "t": t, "theta": theta,
                            "gamma": gamma, "alpha": alpha,
                            "x": pt[0], "y": pt[1], "z": pt[2],
                        },
                        lhs=lhs,
                        rhs=rhs,
                        regime=regime,
                    )
                )
    fits, flags = [], {}
    origin = (0.0, 0.0, 0.0)
    Amax = max(A_values)
    if slice_id == "early":
        tbm = Amax ** -theta
        ts_fit = np.geomspace(1e-3 * tbm, 0.2 * tbm, 8)
        vals = [
            _slice_lhs(origin, t, Amax, slice_id, theta, gamma, alpha, wave)
            for t in ts_fit
        ]
        slope, ci = fit_powerlaw(ts_fit, vals)
        fits.append(ExponentFit("small-t growth", slope, 0.5, 0.1, ci))
    if slice_id in ("mid", "damped-mid"):
        t0 = 0.5 * Amax ** -theta
        flags["zero-branch-exact"] = (
            _slice_lhs(origin, t0, Amax, slice_id, theta, gamma, alpha, wave)
            == 0.0
        )
    if slice_id == "late":
        As_fit = np.geomspace(8.0, 128.0, 5)
        t0 = 4.0
        ratios = []
        for Af in As_fit:
            lhs = _slice_lhs(origin, t0, Af, slice_id, theta, gamma, alpha, wave)
            ratios.append(lhs / (_slice_amp(slice_id, t0, Af, theta, gamma, alpha) * 8.0))
        slope, ci = fit_powerlaw(As_fit, ratios)
        fits.append(
            ExponentFit("shear-constant decay", slope, -(1.0 - 2.0 * gamma), 0.15, ci)
        )
    regime_sups = {}
    for c in cases:
        if c.regime != "zero":
            regime_sups[c.regime] = max(regime_sups.get(c.regime, 0.0), c.ratio)
    return LemmaReport(
        check=slice_id,
        cases=cases,
        fits=fits,
        flags=flags,
        band_sups=regime_sups,
        band_cap=None,
        notes=f"theta={theta} gamma={gamma} alpha={alpha}",
    )


def _regime(t, A, theta):
    tb = A ** (-theta) if A > 0 else math.inf
    if t <= tb:
        return "early"
    if t <= 1.0:
        return "mid"
    return "late"


# ---------------------------------------------------------------------------
# screened-kernel convolution (time-independent smoothing)


def check_screened(
    A_values=(1.0, 10.0, 100.0),
    t_values=(0.05, 0.3, 1.0, 3.0, 10.0),
    C1p=60.0,
    C1pp=60.0,
    rng=None,
):
    """Convolution of (1 + 1/r) e^{-r} / r with the wave pattern stays
    inside the 3/2-broadened wave pattern."""
    r, rw = gauss_panels(0.0, 45.0, 16, 6)
    mu, muw = _leggauss(40)
    nphi = 80
    phi = 2.0 * math.pi * (np.arange(nphi) + 0.5) / nphi
    wphi = 2.0 * math.pi / nphi
    sint = np.sqrt(1.0 - mu * mu)
    # offsets from the evaluation point, shape (r, mu, phi)
    ox = r[:, None, None] * (sint[None, :, None] * np.cos(phi[None, None, :]))
    oy = r[:, None, None] * (sint[None, :, None] * np.sin(phi[None, None, :]))
    oz = r[:, None, None] * (mu[None, :, None] * np.ones_like(phi)[None, None, :])
    wrad = (rw * (r + 1.0) * np.exp(-r))[:, None, None] * muw[None, :, None] * wphi

    cases = []
    for A in A_values:
        for t in t_values:
            att = 1.0 + A * A * t * t
            xg = math.sqrt(C1p * t * att)
            yg = math.sqrt(C1pp * t)
            for pt in _eval_points(t, A, xg, yg, yg, mults=(2.0, 3.0))[:4]:
                x, y, z = pt
                W = wave_scriptW(x + ox, y + oy, z + oz, t, C1p, C1pp, A)
                lhs = float(np.sum(wrad * W))
                rhs = float(
                    wave_scriptW(x, y, z, t, 1.5 * C1p, 1.5 * C1pp, A)
                )
                cases.append(
                    InequalityCase(
                        check="screened",
                        estimate="",
                        params={"A": A, "t": t, "x": x, "y": y, "z": z},
                        lhs=lhs,
                        rhs=rhs,
                        regime=_time_band(t, A),
                    )
                )
    return LemmaReport(check="screened", cases=cases)


# ---------------------------------------------------------------------------
# cross-shear line estimate (z-direction)


def check_zline(C1=2.0, Cpp=640.0, tau_values=None, sigma_values=None):
    """Gaussian line smoothing of the cross-shear envelope: prefactor
    min(sqrt(tau), sqrt(sigma)) + min(sqrt(tau), 1) and 3/2-broadening."""
    if Cpp <= 90.0 * C1:
        raise ValueError("requires Cdblprime > 90 C1")
    taus = np.geomspace(1e-4, 30.0, 8) if tau_values is None else tau_values
    sigmas = np.geomspace(1e-4, 30.0, 8) if sigma_values is None else sigma_values
    cases = []
    for tau in taus:
        for sigma in sigmas:
            t = tau + sigma
            pref = min(math.sqrt(tau), math.sqrt(sigma)) + min(math.sqrt(tau), 1.0)
            for z in (0.0, 2.0 * math.sqrt(1.5 * Cpp * t), 3.0 * Cpp):
                lhs = float(int_gauss_envelope(z, C1 * tau, Cpp * sigma, Cpp))
                rhs = pref * float(wave_Wo(z, t, 1.5 * Cpp, 1.5 * Cpp))
                regime = "diffusive" if tau <= min(sigma, 1.0) else "envelope"
                cases.append(
                    InequalityCase(
                        check="zline",
                        estimate="",
                        params={"tau": tau, "sigma": sigma, "t": t, "z": z},
                        lhs=lhs,
                        rhs=rhs,
                        regime=regime,
                    )
                )
    # min-branch fits: the kernel-width branch in tau, the source-width
    # branch in sigma (its Gaussian component carries the sigma scaling)
    taus_f = np.geomspace(1e-5, 1e-3, 8)
    vals = [float(int_gauss_envelope(0.0, C1 * tau, Cpp * 2.0, Cpp)) for tau in taus_f]
    s1, ci1 = fit_powerlaw(taus_f, vals)
    sig_f = np.geomspace(1e-5, 1e-3, 8)
    vals2 = [float(int_gauss_gauss(0.0, C1 * 2.0, Cpp * s)) for s in sig_f]
    s2, ci2 = fit_powerlaw(sig_f, vals2)
    fits = [
        ExponentFit("small-tau branch", s1, 0.5, 0.1, ci1),
        ExponentFit("small-sigma branch", s2, 0.5, 0.1, ci2),
    ]
    return LemmaReport(check="zline", cases=cases, fits=fits)


# ---------------------------------------------------------------------------
# sheared-plane estimates: four source-envelope combinations


def _plane_lhs(kind, x, y, tau, sigma, A, C1, Cp, Cpp):
    """Plane convolution of the kernel Gaussian with one of the four
    Gaussian/exponential source combinations, in sheared coordinates."""
    t = tau + sigma
    a = C1 * tau * (1.0 + A * A * tau * tau / 12.0)
    b = C1 * tau
    X0 = x - 0.5 * A * tau * y
    c = 0.5 * A * t
    bu0 = Cp * sigma * (1.0 + A * A * sigma * sigma)
    Lu = Cp * (1.0 + A * sigma)
    if kind == "gg":
        # integrate u first (Gaussian * Gaussian), leaving a product of
        # three Gaussians in v; combine those pairwise so every exponent
        # stays nonpositive (the direct 2-D closed form cancels
        # catastrophically at large A t)
        su = 4.0 * a + bu0
        pref = math.sqrt(4.0 * math.pi * a * bu0 / su)
        beta_v, v2 = 1.0 / (4.0 * b), y
        gamma_v = 1.0 / (Cpp * sigma)
        if c > 0.0:
            alpha_v, v1 = c * c / su, X0 / c
            kap = alpha_v + beta_v
            logp = -alpha_v * beta_v * (v1 - v2) ** 2 / kap
            vbar = (alpha_v * v1 + beta_v * v2) / kap
        else:
            kap, vbar = beta_v, v2
            logp = -X0 * X0 / su
        tot = kap + gamma_v
        logp += -kap * gamma_v * vbar * vbar / tot
        return float(pref * math.sqrt(math.pi / tot) * math.exp(logp))
    sy = math.sqrt(b)
    if kind in ("ee", "ge"):
        henv = 95.0 * Cpp
    else:
        henv = 45.0 * math.sqrt(Cpp * sigma)
    lo = max(y - 45.0 * sy, -henv)
    hi = min(y + 45.0 * sy, henv)
    if hi <= lo:
        return 0.0
    features = [(y, sy), (0.0, math.sqrt(Cpp * sigma)), (0.0, Cpp)]
    if c > 0.0:
        su = max(2.0 * math.sqrt(a), math.sqrt(bu0), Lu)
        features.append((X0 / c, su / c))
    v, w = _feature_nodes(features, lo, hi)
    gy = np.exp(-((y - v) ** 2) / (4.0 * b))
    mu = X0 - c * v
    if kind == "ee":
        inner = int_gauss_absexp(mu, a, Lu)
        ev = np.exp(-np.abs(v) / Cpp)
    elif kind == "ge":
        inner = int_gauss_gauss(mu, a, bu0)
        ev = np.exp(-np.abs(v) / Cpp)
    else:  # eg
        inner = int_gauss_absexp(mu, a, Lu)
        ev = np.exp(-v * v / (Cpp * sigma))
    return float(np.sum(w * gy * ev * inner))


def _plane_branches(kind, tau, sigma, A):
    st = math.sqrt(1.0 + A * A * tau * tau)
    ss = math.sqrt(1.0 + A * A * sigma * sigma)
    es = 1.0 + A * sigma
    if kind == "gg":
        return {"kernel": tau * st, "source": sigma * ss}
    if kind == "ee":
        return {
            "kernel": tau * st,
            "root-kernel": math.sqrt(tau) * st,
            "mixed": math.sqrt(tau) * es,
            "source": es,
        }
    if kind == "ge":
        return {
            "kernel": tau * st,
            "root-kernel": math.sqrt(tau) * st,
            "mixed": math.sqrt(tau * sigma) * ss,
            "source": math.sqrt(sigma) * ss,
        }
    return {
        "kernel": tau * st,
        "mixed": math.sqrt(sigma * tau) * st,
        "root-kernel": math.sqrt(tau) * es,
        "source": math.sqrt(sigma) * es,
    }


def _plane_rhs_envelope(kind, x, y, t, A, Cp, Cpp, B=1.5):
    u = x - 0.5 * A * t * y
    att = 1.0 + A * A * t * t
    gx = math.exp(-u * u / (B * Cp * t * att))
    gy = math.exp(-y * y / (B * Cpp * t))
    if kind == "gg":
        return gx * gy
    wx = float(wave_Wx(x, y, t, B * Cp, B * Cp, A))
    if kind == "eg":
        return wx * gy
    return wx * float(wave_Wo(y, t, B * Cpp, B * Cpp))


def check_plane(
    kind,
    A_values=(1.0, 10.0, 100.0),
    tau_values=None,
    sigma_values=None,
    wave=None,
):
    """One of the four sheared-plane convolution estimates; the min over
    kernel/source spreading branches sets the prefactor."""
    kinds = {k.split("-")[1] for k in PLANE_KINDS}
    if kind.startswith("plane-"):
        kind = kind.split("-", 1)[1]
    if kind not in kinds:
        raise ValueError(f"unknown plane estimate {kind!r}")
    wave = wave or WaveParams()
    if not wave.check_interaction_constraints():
        raise ValueError("wave widths violate the interaction constraints")
    C1, Cp, Cpp = wave.C1, wave.Cprime, wave.Cdblprime
    taus = np.geomspace(1e-3, 10.0, 6) if tau_values is None else tau_values
    sigmas = np.geomspace(1e-3, 10.0, 6) if sigma_values is None else sigma_values
    cases = []
    for A in A_values:
        for tau in taus:
            for sigma in sigmas:
                t = tau + sigma
                att = 1.0 + A * A * t * t
                xg = math.sqrt(1.5 * Cp * t * att)
                y1 = 1.5 * math.sqrt(1.5 * Cpp * t)
                pts = [(0.0, 0.0), (1.5 * xg, 0.0), (0.5 * A * t * y1, y1)]
                branches = _plane_branches(kind, tau, sigma, A)
                active = min(branches, key=branches.get)
                pref = branches[active]
                for (x, y) in pts:
                    lhs = _plane_lhs(kind, x, y, tau, sigma, A, C1, Cp, Cpp)
                    rhs = pref * _plane_rhs_envelope(kind, x, y, t, A, Cp, Cpp)
                    cases.append(
                        InequalityCase(
                            check=f"plane-{kind}",
                            estimate="",
                            params={
                                "A": A, "tau": tau, "sigma": sigma,
                                "t": t, "x": x, "y": y,
                            },
                            lhs=lhs,
                            rhs=rhs,
                            regime=active,
                        )
                    )
    fits = _plane_fits(kind, C1, Cp, Cpp)
    return LemmaReport(check=f"plane-{kind}", cases=cases, fits=fits)


def _plane_fits(kind, C1, Cp, Cpp):
    """Min-branch scaling fits in corners where one branch dominates."""
    A = 100.0

    def sweep(var, fixed, values):
        out = []
        for v in values:
            tau, sigma = (v, fixed) if var == "tau" else (fixed, v)
            out.append(_plane_lhs(kind, 0.0, 0.0, tau, sigma, A, C1, Cp, Cpp))
        return np.array(out)

    fits = []
    small = np.geomspace(1e-4, 8e-4, 6)
    if kind == "gg":
        s, ci = fit_powerlaw(small, sweep("tau", 5.0, small))
        fits.append(ExponentFit("diffusive kernel branch", s, 1.0, FIT_WIDEN, ci))
        rng = np.geomspace(0.1, 0.5, 6)
        s, ci = fit_powerlaw(rng, sweep("tau", 5.0, rng))
        fits.append(ExponentFit("sheared kernel branch", s, 2.0, FIT_WIDEN, ci))
    elif kind == "ee":
        s, ci = fit_powerlaw(small, sweep("tau", 1.0, small))
        fits.append(ExponentFit("diffusive kernel branch", s, 1.0, FIT_WIDEN, ci))
        # the constant (1 + A sigma) branch needs the kernel's v-spread
        # past the source tail width: tau >> Cpp^2 / (4 C1)
        tplat = 40.0 * Cpp * Cpp / (4.0 * C1)
        rng = np.geomspace(tplat, 30.0 * tplat, 6)
        s, ci = fit_powerlaw(rng, sweep("tau", 1.0, rng))
        fits.append(ExponentFit("source plateau branch", s, 0.0, FIT_WIDEN, ci))
        # large-A sigma growth of the exponential source branch
        rng = np.geomspace(0.5, 8.0, 6)
        s, ci = fit_powerlaw(1.0 + A * rng, sweep("sigma", 3.0 * tplat, rng))
        fits.append(ExponentFit("shear-tail growth", s, 1.0, 0.1, ci))
    elif kind == "ge":
        s, ci = fit_powerlaw(small, sweep("sigma", 2.0, small))
        fits.append(ExponentFit("narrow source branch", s, 0.5, FIT_WIDEN, ci))
        # sqrt(sigma) (1 + A^2 sigma^2)^{1/2} branch: the source Gaussian
        # must sit inside the kernel Gaussian, i.e. tau >> sigma Cprime/C1
        rng = np.geomspace(0.05, 0.2, 6)
        s, ci = fit_powerlaw(rng, sweep("sigma", 100.0, rng))
        fits.append(ExponentFit("sheared source branch", s, 1.5, FIT_WIDEN, ci))
    else:  # eg
        s, ci = fit_powerlaw(small, sweep("sigma", 2.0, small))
        fits.append(ExponentFit("narrow source branch", s, 0.5, FIT_WIDEN, ci))
        s, ci = fit_powerlaw(small, sweep("tau", 1.0, small))
        fits.append(ExponentFit("diffusive kernel branch", s, 1.0, FIT_WIDEN, ci))
    return fits


# ---------------------------------------------------------------------------
# envelope constants realized by a completed run


def periodization_factor(t, A, box, env: EnvelopeParams):
    """Peak boost of the wave pattern under box periodization.

    On a periodic box the solution is the image sum of the whole-space
    one, so its peak is bounded by A(t) times the image sum of the
    pattern, not the pattern itself.  Once the pattern's x-extent
    (growing like A t^{3/2}) exceeds the box, that sum grows like
    extent / box -- without it the measured envelope constant drifts
    with t for purely geometric reasons.  Returns the exact image-sum
    factor (>= 1) at the pattern core, per axis.
    """

    def axis(L, b, Le):
        kmax = int(max(6.0 * math.sqrt(b), 25.0 * Le) / L) + 2
        k = np.arange(1, kmax + 1) * L
        s = 1.0 + 2.0 * float(np.sum(np.exp(-k * k / b)))
        s += 1.0 + 2.0 * float(np.sum(np.exp(-k / Le)))
        return s / 2.0

    att = 1.0 + A * A * t * t
    f = axis(box[0], env.C1prime * t * att, env.C1prime * (1.0 + A * t))
    for L in box[1:]:
        f *= axis(L, env.C1dblprime * t, env.C1dblprime)
    return f


def _linear_n0(cfg, ts, env):
    """Empirical linear-estimate constant: sup over t of
    sup_x |e^{tL} n0| / (C0 * A(t) * W) on the run's own grid."""
    from . import solver as _solver
    from .fields import Field

    st = _solver.initial_state(cfg)
    fld = Field(st.n.copy(), st.grid.spacing, _solver.origin_of(cfg), time=0.0)
    axes = [
        -0.5 * L + (L / N) * np.arange(N)
        for L, N in zip(cfg.box, cfg.resolution)
    ]
    X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
    best = 0.0
    prev = 0.0
    for t in ts:
        fld = _solver.linear_step(fld, t - prev, cfg.A)
        prev = t
        # linear_step stays in the continuously sheared frame: lab
        # x = x' + A t y
        W = wave_scriptW_2d(
            X + cfg.A * t * Y, Y, t, env.C1prime, env.C1dblprime, cfg.A
        )
        amp = float(envelope_A(t, env))
        fac = periodization_factor(t, cfg.A, cfg.box, env)
        best = max(
            best, float(np.max(np.abs(fld.values) / W)) / (amp * fac * cfg.C0)
        )
    return best


def estimate_bootstrap_constants(run_dir, theta=None, gamma=None):
    """Envelope constants realized by a completed run.

    From the recorded diagnostics ratio(t) = sup_x |n| / W, computes the
    per-regime constants sup_t ratio(t) / A(t), their mid/late
    stability, the linear-estimate constant N0 on the same grid, and
    whether the realized constant closes the ansatz inequality
    realized <= 2 * N0 * C0.

    Constants are measured against the box-periodized envelope (the
    raw whole-space version is also reported under regimes_raw): once
    the pattern outgrows the box the raw ratio drifts upward at a rate
    set purely by the truncation, not by the dynamics.
    """
    run_dir = Path(run_dir)
    cfg = load_config(run_dir / "config.txt")
    theta = cfg.theta if theta is None else theta
    gamma = cfg.gamma if gamma is None else gamma
    data = np.genfromtxt(run_dir / "diagnostics.csv", delimiter=",", names=True)
    data = np.atleast_1d(data)
    names = data.dtype.names
    tcol = names[0]
    rcol = [n for n in names if "envelope" in n][0]
    ts = np.asarray(data[tcol], dtype=float)
    ratios = np.asarray(data[rcol], dtype=float)
    keep = (ts > 0) & np.isfinite(ratios)
    ts, ratios = ts[keep], ratios[keep]
    env = EnvelopeParams(
        A=cfg.A, theta=theta, gamma=gamma, C0=cfg.C0, Cstar=cfg.Cstar,
        C1prime=60.0, C1dblprime=60.0,
    )
    amps = envelope_A(ts, env)
    facs = np.array([periodization_factor(t, cfg.A, cfg.box, env) for t in ts])
    consts = ratios / (amps * facs)
    out = {"A": cfg.A, "theta": theta, "gamma": gamma,
           "regimes": {}, "regimes_raw": {}}
    for t, c, craw in zip(ts, consts, ratios / amps):
        r = _regime(t, cfg.A, theta)
        out["regimes"][r] = max(out["regimes"].get(r, 0.0), float(c))
        out["regimes_raw"][r] = max(out["regimes_raw"].get(r, 0.0), float(craw))
    mid = out["regimes"].get("mid", 0.0)
    late = out["regimes"].get("late", 0.0)
    if mid > 0.0 and late > 0.0:
        out["stability_mid_late"] = max(mid, late) / min(mid, late)
    else:
        out["stability_mid_late"] = None
    out["realized_constant"] = float(np.max(consts)) if len(consts) else 0.0
    if cfg.C0 > 0 and len(ts):
        probe = np.unique(
            np.clip(np.geomspace(max(ts[0], 1e-3), ts[-1], 6), ts[0], ts[-1])
        )
        out["N0"] = _linear_n0(cfg, probe, env)
        out["closure_ok"] = bool(
            out["realized_constant"] <= 2.0 * out["N0"] * cfg.C0
        )
    else:
        out["N0"] = None
        out["closure_ok"] = None
    return out


# ---------------------------------------------------------------------------
# dispatch and report output


CHECKS = {
    "init": check_initial_propagation,
    "early": check_interaction,
    "mid": check_interaction,
    "late": check_interaction,
    "damped-mid": check_interaction,
    "damped-late": check_interaction,
    "screened": check_screened,
    "zline": check_zline,
    "plane-gg": check_plane,
    "plane-ee": check_plane,
    "plane-ge": check_plane,
    "plane-eg": check_plane,
}


def verify_lemma(check_id, grid=None):
    """Run one check with optional grid overrides (A, t, tau, sigma lists
    and beta/alpha/gamma/theta scalars)."""
    if check_id not in CHECKS:
        raise ValueError(f"unknown check {check_id!r}; known: {sorted(CHECKS)}")
    grid = dict(grid or {})
    kw = {}
    if "A" in grid:
        kw["A_values"] = tuple(np.atleast_1d(grid["A"]).astype(float))
    if check_id == "init":
        if "t" in grid:
            kw["t_values"] = np.atleast_1d(grid["t"]).astype(float)
        if "Cstar" in grid:
            kw["Cstar"] = float(grid["Cstar"])
        return check_initial_propagation(float(grid.get("beta", 0.25)), **kw)
    if check_id in SLICE_IDS:
        for name in ("theta", "gamma", "alpha"):
            if name in grid:
                kw[name] = float(grid[name])
        if "t" in grid:
            kw["t_values"] = np.atleast_1d(grid["t"]).astype(float)
        return check_interaction(check_id, **kw)
    if check_id == "screened":
        if "t" in grid:
            kw["t_values"] = tuple(np.atleast_1d(grid["t"]).astype(float))
        return check_screened(**kw)
    if check_id == "zline":
        kw.pop("A_values", None)
        if "tau" in grid:
            kw["tau_values"] = np.atleast_1d(grid["tau"]).astype(float)
        if "sigma" in grid:
            kw["sigma_values"] = np.atleast_1d(grid["sigma"]).astype(float)
        return check_zline(**kw)
    if "tau" in grid:
        kw["tau_values"] = np.atleast_1d(grid["tau"]).astype(float)
    if "sigma" in grid:
        kw["sigma_values"] = np.atleast_1d(grid["sigma"]).astype(float)
    return check_plane(check_id, **kw)


REPORT_COLUMNS = (
    "lemma", "estimate", "regime", "A", "t", "tau", "sigma", "beta",
    "alpha", "gamma", "theta", "x", "y", "z", "lhs", "rhs", "ratio",
)


def write_report_csv(reports, path):
    """Flat per-case CSV across one or more reports."""
    if isinstance(reports, LemmaReport):
        reports = [reports]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(REPORT_COLUMNS)
        for rep in reports:
            for c in rep.cases:
                row = [rep.check, c.estimate, c.regime]
                for key in REPORT_COLUMNS[3:14]:
                    row.append(c.params.get(key, ""))
                row.extend([repr(c.lhs), repr(c.rhs), repr(c.ratio)])
                wr.writerow(row)


def report_summary(reports):
    if isinstance(reports, LemmaReport):
        reports = [reports]
    out = []
    for rep in reports:
        out.append(
            {
                "lemma": rep.check,
                "notes": rep.notes,
                "n_cases": len(rep.cases),
                "sup_ratio": rep.sup_ratio,
                "regime_sups": rep.regime_sups,
                "band_sups": rep.band_sups,
                "fits": [
                    {
                        "name": f.name,
                        "slope": f.slope,
                        "target": f.target,
                        "tol": f.tol,
                        "ci": f.ci,
                        "ok": f.ok,
                    }
                    for f in rep.fits
                ],
                "flags": dict(rep.flags),
                "passed": rep.passed,
            }
        )
    return out


def write_report_json(reports, path):
    with open(path, "w") as fh:
        json.dump(report_summary(reports), fh, indent=2)
        fh.write("\n")
