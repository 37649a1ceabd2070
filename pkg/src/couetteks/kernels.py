"""Closed-form heat kernels in a Couette shear background.

Everything here is an exact formula: the 2-D/3-D advected heat kernels,
their anisotropic derivatives, the damped variant used for the
chemoattractant, the 3-D screened-Poisson (Yukawa) kernel, the
Gaussian-plus-exponential wave-pattern envelopes aligned with the shear
characteristic x = (A t / 2) y, and the three-regime time-decay majorants
split at t = A^(-theta) and t = 1.

All functions are pure and accept numpy arrays in any field of the query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class KernelQuery:
    """Point/time/shear tuple at which kernels and envelopes are evaluated.

    ``y0`` is the source ordinate: the kernels are not translation
    invariant in y, only in x and z.
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    t: float = 1.0
    y0: float = 0.0
    A: float = 0.0

    def __post_init__(self):
        if not np.all(np.asarray(self.t) > 0):
            raise ValueError("kernel query requires t > 0")
        if not np.all(np.asarray(self.A) >= 0):
            raise ValueError("kernel query requires A >= 0")


@dataclass(frozen=True)
class WaveParams:
    """Shape constants of the wave-pattern envelopes.

    ``C1`` broadens derivative envelopes, (Cprime, Cdblprime) are the
    interaction-lemma widths, and B is the broadening factor picked up by
    each convolution of wave patterns.  theta1..theta3 are the geometric
    splitting factors entering the width-constraint systems.
    """

    D1: float = 1.0
    D2: float = 1.0
    D3: float = 1.0
    C1: float = 2.0
    Cprime: float = 921600.0
    Cdblprime: float = 640.0
    B: float = 1.5
    theta1: float = 2.0
    theta2: float = 1.15
    theta3: float = 1.15

    def __post_init__(self):
        for name in ("D1", "D2", "D3", "Cprime", "Cdblprime"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.C1 <= 1:
            raise ValueError("C1 must exceed 1")
        if not 1.0 < self.B <= 1.5:
            raise ValueError("B must lie in (1, 3/2]")

    def check_interaction_constraints(self) -> bool:
        """Width constraints that make the wave-interaction bounds close.

        Two systems must hold for (Cprime, Cdblprime) with the stored
        geometric factors; the second one additionally controls the
        mixed Gaussian/exponential cross terms.
        """
        t1, t2, t3 = self.theta1, self.theta2, self.theta3
        f1 = t1 / (t1 - 1.0)
        f2 = t2 / (t2 - 1.0)
        f3 = t3 / (t3 - 1.0)
        cp32 = 1.5 * self.Cprime
        cpp32 = 1.5 * self.Cdblprime
        sys_gauss = (
            4.0 * self.C1 * f1**2 * f2**2 <= cp32
            and 9.0 * self.Cdblprime * t1**2 * f2**2 <= cp32
            and 8.0 * self.C1 * f3**2 <= cpp32
        )
        sys_exp = (
            4.0 * self.C1 * f1**2 * f2**2 <= cp32
            and 8.0 * self.C1 * t1**2 * f2**2 <= cp32
            and 10.0 * self.Cdblprime * t1 * f2 <= cp32
            and 8.0 * self.C1 * f3**2 <= cpp32
        )
        sep = self.Cdblprime > 90.0 * self.C1
        return sys_gauss and sys_exp and sep


@dataclass(frozen=True)
class EnvelopeParams:
    """Constants of the decay envelope A(t) * W(x, y, z, t).

    ``epsilon0`` is always recomputed from (theta, gamma); it is the
    exponent margin left after balancing the t^(-1/2) singularity against
    the (1 + A^2 t^2)^(-1/2) shear gain.
    """

    A: float
    theta: float = 0.8
    gamma: float = 0.5
    C0: float = 2.0
    Cstar: float = 2.0
    C0star: float = 0.0
    C1prime: float = 60.0
    C1dblprime: float = 60.0
    C1: float = 2.0
    parabolic: bool = False  # True for the fully parabolic (epsilon=1) model

    def __post_init__(self):
        if not (2.0 / 3.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (2/3, 1)")
        lo = 1.0 / 3.0 if self.parabolic else 0.0
        if not (lo < self.gamma <= 0.5):
            raise ValueError(
                f"gamma must lie in ({lo:.4g}, 1/2] for this model variant"
            )
        floor = max(16.0 * self.C1, 9.0 * self.Cstar, 60.0)
        if self.C1prime < floor or self.C1dblprime < floor:
            raise ValueError(
                f"envelope widths must be >= max(16*C1, 9*Cstar, 60) = {floor}"
            )
        if self.A < 0:
            raise ValueError("A must be nonnegative")

    @property
    def epsilon0(self) -> float:
        return (1.0 + self.gamma) * (1.5 * self.theta - 1.0) / 2.0

    @property
    def t_break(self) -> float:
        """Early/intermediate regime boundary t = A^(-theta)."""
        return self.A ** (-self.theta) if self.A > 0 else math.inf

    def shear_window_ok(self) -> bool:
        """Parabolic-parabolic admissible shear window C0 << A < C0/C0star."""
        if not self.parabolic:
            return True
        if self.C0star <= 0:
            return self.A > self.C0
        return self.C0 < self.A < self.C0 / self.C0star


# ---------------------------------------------------------------------------
# kernels


def _spread(t, A):
    """Shear-enhanced x-variance factor 1 + A^2 t^2 / 12."""
    return 1.0 + A * A * t * t / 12.0


def _g3(x, y, z, t, y0, A):
    s = _spread(t, A)
    xc = x - 0.5 * A * t * (y + y0)
    arg = xc * xc / (4.0 * t * s) + (y - y0) ** 2 / (4.0 * t) + z * z / (4.0 * t)
    return (FOUR_PI * t) ** -1.5 / np.sqrt(s) * np.exp(-arg)


def _g2(x, y, t, y0, A):
    s = _spread(t, A)
    xc = x - 0.5 * A * t * (y + y0)
    arg = xc * xc / (4.0 * t * s) + (y - y0) ** 2 / (4.0 * t)
    return 1.0 / (FOUR_PI * t) / np.sqrt(s) * np.exp(-arg)


def green_couette_3d(q: KernelQuery):
    """3-D heat kernel advected by the Couette flow (A y, 0, 0)."""
    return _g3(q.x, q.y, q.z, q.t, q.y0, q.A)


def green_couette_2d(q: KernelQuery):
    """2-D reduction of the Couette heat kernel."""
    return _g2(q.x, q.y, q.t, q.y0, q.A)


def grad_green_couette(q: KernelQuery):
    """Exact (d/dx, d/dy0, d/dz) of the 3-D kernel.

    The three components decay anisotropically: the x-derivative gains a
    full extra (1 + A^2 t^2 / 12)^(-1/2) over the other two.
    """
    g = _g3(q.x, q.y, q.z, q.t, q.y0, q.A)
    s = _spread(q.t, q.A)
    xc = q.x - 0.5 * q.A * q.t * (q.y + q.y0)
    gx = -xc / (2.0 * q.t * s) * g
    gy0 = (q.A * xc / (4.0 * s) + (q.y - q.y0) / (2.0 * q.t)) * g
    gz = -q.z / (2.0 * q.t) * g
    return np.array([gx, gy0, gz])


def green_c_parabolic(q: KernelQuery):
    """Damped kernel of the chemoattractant equation: e^(-t) times the kernel."""
    return np.exp(-q.t) * _g3(q.x, q.y, q.z, q.t, q.y0, q.A)


def yukawa(r):
    """Screened-Poisson kernel in 3-D: e^(-r) / (4 pi r).

    Implemented with positive sign so that (-Lap + 1)^(-1) of a
    nonnegative source is nonnegative; the Fourier symbol of the kernel
    is 1 / (1 + |k|^2).
    """
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0):
        raise ValueError("yukawa requires r > 0")
    return np.exp(-r) / (FOUR_PI * r)


def yukawa_gradient_bound(r):
    """Magnitude bound (1 + r) e^(-r) / r^2 for the kernel gradient."""
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0):
        raise ValueError("gradient bound requires r > 0")
    return (1.0 + r) * np.exp(-r) / (r * r)


# ---------------------------------------------------------------------------
# wave-pattern envelopes


def wave_W(q: KernelQuery, params: WaveParams):
    """Gaussian wave-structure factor of the kernel, widths (D1, D2, D3)."""
    s = _spread(q.t, q.A)
    xc = q.x - 0.5 * q.A * q.t * (q.y + q.y0)
    arg = (
        xc * xc / (4.0 * params.D1 * q.t * s)
        + (q.y - q.y0) ** 2 / (4.0 * params.D2 * q.t)
        + q.z * q.z / (4.0 * params.D3 * q.t)
    )
    return np.exp(-arg)


def wave_Wx(x, y, t, D1, D2, A):
    """Sheared-coordinate envelope: Gaussian core plus exponential tail."""
    u = x - 0.5 * A * t * y
    core = np.exp(-u * u / (D1 * t * (1.0 + A * A * t * t)))
    tail = np.exp(-np.abs(u) / (D2 * (1.0 + A * t)))
    return core + tail


def wave_Wo(u, t, D1, D2):
    """Cross-shear envelope: heat core plus exponential tail."""
    return np.exp(-u * u / (D1 * t)) + np.exp(-np.abs(u) / D2)


def wave_scriptW(x, y, z, t, Cprime, Cdblprime, A):
    """Full 3-D wave pattern: product of the x, y and z envelopes."""
    return (
        wave_Wx(x, y, t, Cprime, Cprime, A)
        * wave_Wo(y, t, Cdblprime, Cdblprime)
        * wave_Wo(z, t, Cdblprime, Cdblprime)
    )


def wave_scriptW_2d(x, y, t, Cprime, Cdblprime, A):
    """2-D wave pattern (no z factor), used by planar simulations."""
    return wave_Wx(x, y, t, Cprime, Cprime, A) * wave_Wo(y, t, Cdblprime, Cdblprime)


# ---------------------------------------------------------------------------
# time-decay majorants


def _three_regimes(t, A, theta, early, middle, late):
    """Piecewise evaluation on (0, A^-theta], (A^-theta, 1], (1, inf).

    Ties go to the left branch.  With A <= 1 the middle regime is empty.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("decay envelopes require t > 0")
    tb = A ** (-theta) if A > 0 else math.inf
    scalar = t.ndim == 0
    tt = np.atleast_1d(t).astype(float)
    out = np.empty_like(tt)
    m_early = tt <= tb
    m_late = (tt > max(tb, 1.0)) & ~m_early
    m_mid = ~(m_early | m_late)
    out[m_early] = early(tt[m_early])
    out[m_mid] = middle(tt[m_mid])
    out[m_late] = late(tt[m_late])
    return float(out[0]) if scalar else out


def envelope_A(t, p: EnvelopeParams):
    """Three-regime decay majorant of the organism density."""
    A, g = p.A, p.gamma
    pre = A ** (-(1.0 - p.theta) * g) if A > 0 else 1.0
    return _three_regimes(
        t,
        A,
        p.theta,
        lambda s: np.ones_like(s),
        lambda s: pre * s ** (-0.25 - g / 4.0) * (1.0 + A * A * s * s) ** (-0.25 + g / 4.0),
        lambda s: pre * (1.0 + s) ** -1.5 * (1.0 + A * A * s * s) ** (-0.5 + g / 2.0),
    )


def envelope_A1(t, p: EnvelopeParams):
    """Majorant of the early-time slice of the Duhamel interaction integral."""
    A, g = p.A, p.gamma
    pre = A ** (-p.epsilon0 - (1.0 - p.theta) * g)
    return _three_regimes(
        t,
        A,
        p.theta,
        lambda s: np.sqrt(s),
        lambda s: pre * s ** (-0.25 - g / 4.0) * (1.0 + A * A * s * s) ** (-0.25 + g / 4.0),
        lambda s: A ** (1.0 - 2.0 * p.theta)
        * (1.0 + s) ** -2.0
        * (1.0 + A * A * s * s) ** -0.5,
    )


def envelope_A2(t, p: EnvelopeParams):
    """Majorant of the intermediate-time interaction slice; zero early on."""
    A, g = p.A, p.gamma
    return _three_regimes(
        t,
        A,
        p.theta,
        lambda s: np.zeros_like(s),
        lambda s: s ** (-0.25 - g / 4.0) * (1.0 + A * A * s * s) ** (-0.25 + g / 4.0),
        lambda s: A**g * (1.0 + s) ** -2.0 * (1.0 + A * A * s * s) ** -0.5,
    )


def envelope_A3(t, alpha, p: EnvelopeParams):
    """Majorant of the damped chemoattractant interaction slice."""
    if not (1.5 <= alpha <= 2.0):
        raise ValueError("alpha must lie in [3/2, 2]")
    A, g = p.A, p.gamma
    return _three_regimes(
        t,
        A,
        p.theta,
        lambda s: np.zeros_like(s),
        lambda s: s ** (-0.25 - g / 4.0) * (1.0 + A * A * s * s) ** (-0.25 + g / 4.0),
        lambda s: A ** (0.5 + g / 2.0)
        * np.exp(-s / 2.0)
        * (1.0 + s) ** -alpha
        * (1.0 + A * A * s * s) ** -0.5,
    )


def chi(t):
    """Late-time cut-off: 0 on (0, 1], 1 beyond."""
    t = np.asarray(t, dtype=float)
    out = (t > 1.0).astype(float)
    return float(out) if out.ndim == 0 else out
