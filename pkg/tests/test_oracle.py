"""Oracle tests: kernel-quadrature propagation and Picard iteration."""

import math

import numpy as np
import pytest

from couetteks import oracle as O
from couetteks import solver as S
from couetteks.config import SimConfig
from couetteks.fields import Field

from tests.test_solver import shear_convolution_exact


def gaussian_2d(N, L, a, amp=1.0):
    x = -0.5 * L + (L / N) * np.arange(N)
    X, Y = np.meshgrid(x, x, indexing="ij")
    vals = amp * np.exp(-(X**2 + Y**2) / (4 * a))
    return Field(vals, (L / N, L / N), (-0.5 * L, -0.5 * L))


def test_spec_validation():
    with pytest.raises(ValueError):
        O.QuadratureSpec(panels_per_unit_time=2)
    with pytest.raises(ValueError):
        O.QuadratureSpec(tol=0.0)


def test_propagate_linear_matches_closed_form():
    N, L, a, A, t = 64, 16.0, 0.3**2, 10.0, 0.5
    f = gaussian_2d(N, L, a)
    out = O.propagate_linear(f, t, A)
    x = np.asarray(f.axes()[0])
    X, Y = np.meshgrid(x, x, indexing="ij")
    exact = shear_convolution_exact(X, Y, t, A, a, 1.0)
    err = np.max(np.abs(out.values - exact)) / np.max(exact)
    assert err <= 1e-4


def test_propagate_linear_A0_matches_heat_semigroup():
    N, L, a, t = 64, 16.0, 0.4**2, 0.5
    f = gaussian_2d(N, L, a)
    out = O.propagate_linear(f, t, 0.0)
    ref = S.linear_step(f, t, 0.0)
    err = np.max(np.abs(out.values - ref.values)) / np.max(np.abs(ref.values))
    assert err <= 1e-6


def test_propagate_linear_underresolved_fails():
    f = gaussian_2d(64, 16.0, 0.3**2)
    with pytest.raises(O.QuadratureError):
        O.propagate_linear(f, 1e-4, 1.0)


def test_propagate_linear_noncompact_fails():
    f = gaussian_2d(64, 16.0, 0.3**2)
    f.values += 0.5  # constant background touches the box edge
    with pytest.raises(O.QuadratureError):
        O.propagate_linear(f, 0.5, 1.0)


def test_propagate_linear_rejects_3d_and_large():
    f3 = Field(np.zeros((16, 16, 16)), (0.5,) * 3, (0.0,) * 3)
    with pytest.raises(ValueError):
        O.propagate_linear(f3, 0.5, 1.0)
    big = Field(np.zeros((128, 128)), (0.1, 0.1), (0.0, 0.0))
    with pytest.raises(ValueError):
        O.propagate_linear(big, 0.5, 1.0)


def test_picard_zero_data():
    N, L = 64, 16.0
    f = Field(np.zeros((N, N)), (L / N, L / N), (-L / 2, -L / 2))
    cfg = SimConfig(epsilon=0, A=4.0, box=(L, L), resolution=(N, N),
                    t_final=0.2, C0=0.0, Cstar=0.6)
    res = O.picard_solve(f, None, cfg, 0.2)
    assert res.iterations == 1
    assert all(np.all(v == 0.0) for v in res.n_traj)


def test_picard_requires_c0_for_parabolic():
    f = gaussian_2d(64, 16.0, 0.3**2)
    cfg = SimConfig(epsilon=1, A=4.0, box=(16.0, 16.0), resolution=(64, 64),
                    t_final=0.2, C0=1.0, Cstar=0.6)
    with pytest.raises(ValueError):
        O.picard_solve(f, None, cfg, 0.2)


def test_picard_tiny_data_stays_close_to_linear():
    N, L, C0 = 64, 12.8, 1e-4
    cfg = SimConfig(epsilon=0, A=4.0, box=(L, L), resolution=(N, N),
                    t_final=0.1, C0=C0, Cstar=0.6)
    st = S.initial_state(cfg)
    f = Field(st.n, st.grid.spacing, S.origin_of(cfg))
    spec = O.QuadratureSpec(tol=1e-12, max_iter=4)
    res = O.picard_solve(f, None, cfg, 0.1, spec)
    lin = O.propagate_linear(f, 0.1, cfg.A)
    diff = np.max(np.abs(res.n_traj[-1] - lin.values))
    # the quadratic correction scales like C0^2
    assert diff <= 100 * C0**2
    assert res.iterations <= 4


def test_picard_preserves_mass():
    N, L = 64, 12.8
    cfg = SimConfig(epsilon=0, A=4.0, box=(L, L), resolution=(N, N),
                    t_final=0.15, C0=3.0, Cstar=0.6)
    st = S.initial_state(cfg)
    f = Field(st.n, st.grid.spacing, S.origin_of(cfg))
    res = O.picard_solve(f, None, cfg, 0.15)
    dA = (L / N) ** 2
    m0 = np.sum(f.values) * dA
    for v in res.n_traj:
        assert abs(np.sum(v) * dA - m0) <= 1e-6 * abs(m0)


def test_picard_cross_validates_solver():
    # small version of the acceptance check: independent discretizations agree
    N, L, T = 64, 12.8, 0.15
    cfg = SimConfig(epsilon=0, A=4.0, box=(L, L), resolution=(N, N),
                    dt=0.0025, t_final=T, C0=3.0, Cstar=0.6)
    st = S.initial_state(cfg)
    f = Field(st.n.copy(), st.grid.spacing, S.origin_of(cfg))
    res = O.picard_solve(f, None, cfg, T)
    nsteps = int(round(T / cfg.dt))
    for _ in range(nsteps):
        S.step(st, cfg.dt)
    # solver output is in the sheared frame; with A*T below the remap
    # threshold the lab positions are x' + S y, so compare via the oracle
    # field sampled there is unnecessary -- instead map oracle to sheared
    # samples by exact Fourier shear of its final field.
    lab = Field(res.n_traj[-1], f.spacing, f.origin, time=T)
    sheared = _to_sheared(lab, st.S)
    scale = np.max(np.abs(st.n))
    assert np.max(np.abs(st.n - sheared)) <= 1e-2 * scale


def _to_sheared(lab_field: Field, Ssh):
    """Sample a lab-frame periodic field at sheared-frame grid points
    (x' + S y, y) by exact spectral interpolation per y row."""
    vals = lab_field.values
    N = vals.shape[0]
    L = lab_field.spacing[0] * N
    kx = 2 * math.pi * np.fft.fftfreq(N, d=L / N)
    y = np.asarray(lab_field.axes()[1])
    out = np.empty_like(vals)
    fh = np.fft.fft(vals, axis=0)
    for j, yj in enumerate(y):
        out[:, j] = np.fft.ifft(fh[:, j] * np.exp(1j * kx * Ssh * yj)).real
    return out


def test_picard_halving_self_consistency():
    N, L, T = 64, 12.8, 0.1
    cfg = SimConfig(epsilon=0, A=4.0, box=(L, L), resolution=(N, N),
                    t_final=T, C0=3.0, Cstar=0.6)
    st = S.initial_state(cfg)
    f = Field(st.n, st.grid.spacing, S.origin_of(cfg))
    coarse = O.picard_solve(f, None, cfg, T, O.QuadratureSpec(panels_per_unit_time=40))
    fine = O.picard_solve(f, None, cfg, T, O.QuadratureSpec(panels_per_unit_time=80))
    diff = np.max(np.abs(coarse.n_traj[-1] - fine.n_traj[-1]))
    assert diff <= coarse.error_estimate
