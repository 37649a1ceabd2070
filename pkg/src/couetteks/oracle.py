"""Slow quadrature-based reference solutions for desk-scale cross-checks.

Works in the lab frame on a small 2-D grid with compactly supported data.
The linear flow is applied by direct quadrature of the closed-form shear
kernel (honoring its y0 dependence); when the elapsed time is too short
for the kernel to be resolved by the grid, an independent finite-difference
RK4 integrator of the advection-diffusion equation takes over.  The full
solution is built by Picard iteration on the integral (Duhamel) form, with
the divergence kept on the source so the time integrand stays smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import Field
from .kernels import KernelQuery, green_couette_2d


class QuadratureError(RuntimeError):
    """Raised when the requested quadrature cannot meet its tolerance."""


@dataclass
class QuadratureSpec:
    """Resolution knobs of the oracle."""

    panels_per_unit_time: int = 40
    max_iter: int = 8
    tol: float = 1e-7
    kernel_width_cells: float = 2.5  # resolvability threshold for quadrature

    def __post_init__(self):
        if self.panels_per_unit_time < 4:
            raise ValueError("need at least 4 time panels per unit time")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _check_grid(fld: Field):
    if fld.ndim != 2:
        raise ValueError("the oracle is restricted to 2-D fields")
    if max(fld.values.shape) > 96:
        raise ValueError("the oracle is restricted to grids of at most 96^2")


def _kernel_quadrature(arr, x, y, t, A, dx, dy):
    """u(x, y) = sum over (x0, y0) of G(x - x0, y, t; y0) arr(x0, y0) dx dy."""
    out = np.empty_like(arr)
    dA = dx * dy
    dxs = x[:, None] - x[None, :]  # (x, x0)
    for j, yj in enumerate(y):
        # kernel slab for this output row: (x, x0, y0)
        G = green_couette_2d(
            KernelQuery(x=dxs[:, :, None], y=yj, t=t, y0=y[None, None, :], A=A)
        )
        out[:, j] = np.einsum("iko,ko->i", G, arr) * dA
    return out


def _d1(u, h, axis):
    """4th-order centered first derivative, periodic."""
    return (
        8 * (np.roll(u, -1, axis) - np.roll(u, 1, axis))
        - (np.roll(u, -2, axis) - np.roll(u, 2, axis))
    ) / (12 * h)


def _d2(u, h, axis):
    """4th-order centered second derivative, periodic."""
    return (
        -(np.roll(u, -2, axis) + np.roll(u, 2, axis))
        + 16 * (np.roll(u, -1, axis) + np.roll(u, 1, axis))
        - 30 * u
    ) / (12 * h * h)


def _fd_ops(x, y, A):
    """Centered-difference advection-diffusion rate in the lab frame."""
    dx = x[1] - x[0]
    dy = y[1] - y[0]
    Ay = A * y[None, :]

    def rate(u):
        return _d2(u, dx, 0) + _d2(u, dy, 1) - Ay * _d1(u, dx, 0)

    return rate


def _rk4(u, rate, tau, nsub):
    h = tau / nsub
    for _ in range(nsub):
        k1 = rate(u)
        k2 = rate(u + 0.5 * h * k1)
        k3 = rate(u + 0.5 * h * k2)
        k4 = rate(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


class _Propagator:
    """Hybrid linear propagator: kernel quadrature when the Gaussian core
    spans enough cells, finite-difference RK4 below that threshold."""

    def __init__(self, x, y, A, width_cells):
        self.x, self.y, self.A = x, y, A
        self.dx = x[1] - x[0]
        self.dy = y[1] - y[0]
        self.width_cells = width_cells
        self.rate = _fd_ops(x, y, A)
        # RK4 stability for the 4th-order stencils
        dt_diff = 0.2 * min(self.dx, self.dy) ** 2
        vmax = A * np.max(np.abs(y)) if A > 0 else 0.0
        dt_adv = 0.4 * self.dx / vmax if vmax > 0 else math.inf
        self.dt_stab = min(dt_diff, dt_adv)

    def resolvable(self, tau):
        return math.sqrt(4.0 * tau) >= self.width_cells * max(self.dx, self.dy)

    def __call__(self, arr, tau):
        if tau <= 0:
            return arr.copy()
        if self.resolvable(tau):
            return _kernel_quadrature(
                arr, self.x, self.y, tau, self.A, self.dx, self.dy
            )
        nsub = max(1, int(math.ceil(tau / self.dt_stab)))
        return _rk4(arr, self.rate, tau, nsub)


def propagate_linear(n0: Field, t, A, spec: QuadratureSpec | None = None):
    """Kernel-quadrature propagation of compactly supported 2-D data."""
    spec = spec or QuadratureSpec()
    _check_grid(n0)
    if t <= 0:
        raise ValueError("t must be positive")
    x, y = n0.axes()
    dx, dy = n0.spacing
    if math.sqrt(4.0 * t) < spec.kernel_width_cells * max(dx, dy):
        raise QuadratureError(
            f"kernel width {math.sqrt(4 * t):.3g} under-resolved by grid "
            f"spacing {max(dx, dy):.3g}"
        )
    # support check: data must have decayed at the box edge
    edge = max(
        np.max(np.abs(n0.values[0, :])),
        np.max(np.abs(n0.values[:, 0])),
    )
    if edge > 1e-8 * max(np.max(np.abs(n0.values)), 1e-300):
        raise QuadratureError("data not compactly supported on the oracle grid")
    out = _kernel_quadrature(n0.values, np.asarray(x), np.asarray(y), t, A, dx, dy)
    return n0.with_values(out, time=n0.time + t)


def _elliptic_fd_matrix(nx, ny, dx, dy):
    """Periodic 5-point discretization of (-Lap + 1)."""
    ex = np.ones(nx)
    ey = np.ones(ny)
    Dx = sp.diags([ex, -2 * ex, ex], [-1, 0, 1], (nx, nx), format="lil")
    Dx[0, -1] = 1.0
    Dx[-1, 0] = 1.0
    Dy = sp.diags([ey, -2 * ey, ey], [-1, 0, 1], (ny, ny), format="lil")
    Dy[0, -1] = 1.0
    Dy[-1, 0] = 1.0
    lap = sp.kronsum(Dy.tocsr() / dy**2, Dx.tocsr() / dx**2, format="csr")
    return (sp.identity(nx * ny, format="csr") - lap).tocsc()


def _divergence_source(n, c, x, y, dx, dy):
    """-div(n grad c), conservative centered differences (exact zero mean)."""
    fx = n * _d1(c, dx, 0)
    fy = n * _d1(c, dy, 1)
    return -(_d1(fx, dx, 0) + _d1(fy, dy, 1))


def _prefix_weights(m, dt):
    """W[i, j] with integral_0^{t_i} f ~ sum_j W[i, j] f(t_j), 4th order."""
    W = np.zeros((m + 1, m + 1))
    for i in range(1, m + 1):
        if i == 1:
            W[1, :3] += dt * np.array([5.0, 8.0, -1.0]) / 12.0
        elif i == 2:
            W[2, :3] += dt * np.array([1.0, 4.0, 1.0]) / 3.0
        elif i % 2 == 0:
            for k in range(0, i, 2):
                W[i, k : k + 3] += dt * np.array([1.0, 4.0, 1.0]) / 3.0
        else:
            for k in range(0, i - 3, 2):
                W[i, k : k + 3] += dt * np.array([1.0, 4.0, 1.0]) / 3.0
            W[i, i - 3 : i + 1] += dt * np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return W


@dataclass
class PicardResult:
    times: np.ndarray
    n_traj: list
    c_traj: list
    iterations: int
    residuals: list
    error_estimate: float

    def final_n(self, template: Field):
        return template.with_values(self.n_traj[-1], time=float(self.times[-1]))


def picard_solve(n0: Field, c0, cfg, T, spec: QuadratureSpec | None = None):
    """Fixed-point iteration on the integral form of the coupled system.

    cfg supplies epsilon and A.  c0 (Field or None) is required for
    epsilon = 1.  Raises QuadratureError if the iterates stop contracting
    within the iteration cap.
    """
    spec = spec or QuadratureSpec()
    _check_grid(n0)
    if T <= 0:
        raise ValueError("T must be positive")
    eps, A = cfg.epsilon, cfg.A
    if eps == 1 and c0 is None:
        raise ValueError("epsilon = 1 requires initial chemoattractant data")
    x, y = (np.asarray(a) for a in n0.axes())
    dx, dy = n0.spacing
    m = max(4, int(math.ceil(T * spec.panels_per_unit_time)))
    times = np.linspace(0.0, T, m + 1)
    dt = times[1] - times[0]
    W = _prefix_weights(m, dt)
    prop = _Propagator(x, y, A, spec.kernel_width_cells)

    nv0 = n0.values
    lin_n = [nv0.copy()] + [prop(nv0, t) for t in times[1:]]
    if eps == 1:
        cv0 = c0.values
        lin_c = [cv0.copy()] + [
            math.exp(-t) * prop(cv0, t) for t in times[1:]
        ]
    solve_c = None
    if eps == 0:
        lu = spla.factorized(_elliptic_fd_matrix(len(x), len(y), dx, dy))
        solve_c = lambda narr: lu(narr.ravel()).reshape(narr.shape)

    n_traj = [v.copy() for v in lin_n]
    if eps == 0:
        c_traj = [solve_c(v) for v in n_traj]
    else:
        c_traj = [v.copy() for v in lin_c]

    residuals = []
    for it in range(1, spec.max_iter + 1):
        sources = [
            _divergence_source(n_traj[j], c_traj[j], x, y, dx, dy)
            for j in range(m + 1)
        ]
        new_n = [nv0.copy()]
        for i in range(1, m + 1):
            acc = lin_n[i].copy()
            for j in range(i + 1):
                w = W[i, j]
                if w != 0.0:
                    acc += w * prop(sources[j], times[i] - times[j])
            new_n.append(acc)
        if eps == 0:
            new_c = [solve_c(v) for v in new_n]
        else:
            new_c = [lin_c[0].copy()]
            for i in range(1, m + 1):
                acc = lin_c[i].copy()
                for j in range(i + 1):
                    w = W[i, j]
                    if w != 0.0:
                        tau = times[i] - times[j]
                        acc += w * math.exp(-tau) * prop(new_n[j], tau)
                new_c.append(acc)
        res = max(
            float(np.max(np.abs(a - b))) for a, b in zip(new_n, n_traj)
        )
        residuals.append(res)
        n_traj, c_traj = new_n, new_c
        if res < spec.tol:
            break
        if len(residuals) >= 2 and res > residuals[-2] and it >= 3:
            raise QuadratureError(
                f"Picard iteration not contracting (residuals {residuals})"
            )
    else:
        if residuals[-1] >= spec.tol and residuals[-1] > 0.1 * residuals[0]:
            raise QuadratureError(
                f"Picard iteration cap reached without convergence "
                f"(residuals {residuals})"
            )
    # conservative error model: unresolved contraction residual plus the
    # sensitivity of the prefix integrals to the time rule (Simpson vs
    # trapezoid on the source magnitudes dominates the true Simpson error)
    g = np.array([float(np.max(np.abs(s))) for s in sources])
    Wtrap = np.zeros_like(W)
    for i in range(1, m + 1):
        Wtrap[i, : i + 1] = dt
        Wtrap[i, 0] = Wtrap[i, i] = 0.5 * dt
    err = residuals[-1] + float(np.max(np.abs((W - Wtrap) @ g)))
    return PicardResult(
        times=times,
        n_traj=n_traj,
        c_traj=c_traj,
        iterations=len(residuals),
        residuals=residuals,
        error_estimate=err,
    )
