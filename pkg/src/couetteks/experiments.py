"""Experiment recipes built on the solver: the shear-suppression sweep,
late-time decay-rate fits against the predicted envelope, and the
elliptic-vs-parabolic chemoattractant comparison.

Every recipe persists its spec and the package version next to its
outputs, and all aggregation is a pure function of the member runs'
diagnostics files.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import solver
from .config import SimConfig, dump_config, load_config, parse_config
from .kernels import EnvelopeParams, chi, envelope_A, wave_scriptW, wave_scriptW_2d
from .lemmas import fit_powerlaw, periodization_factor


def code_version():
    try:
        from importlib.metadata import version

        return version("couetteks")
    except Exception:
        return "unknown"


# ---------------------------------------------------------------------------
# suppression sweep

PREDICATES = {"no-blowup": lambda row: not row["blowup"]}

_SWEPT_FIELD = {"A": "A", "mass": "C0"}


@dataclass
class SweepSpec:
    """One-parameter sweep around a base configuration."""

    base: SimConfig
    parameter: str  # "A" or "mass"
    values: tuple
    predicate: str = "no-blowup"
    out_dir: str | None = None

    def __post_init__(self):
        if self.parameter not in _SWEPT_FIELD:
            raise ValueError("swept parameter must be 'A' or 'mass'")
        self.values = tuple(float(v) for v in self.values)
        if not self.values:
            raise ValueError("value list must be nonempty")
        if any(nxt <= prv for nxt, prv in zip(self.values[1:], self.values[:-1])):
            raise ValueError("value list must be strictly increasing")
        if self.predicate not in PREDICATES:
            raise ValueError(f"unknown predicate {self.predicate!r}")

    def member_config(self, value):
        return replace(self.base, warnings=[], **{_SWEPT_FIELD[self.parameter]: value})

    def member_dir(self, value):
        if self.out_dir is None:
            raise ValueError("sweep requires an output directory")
        return Path(self.out_dir) / f"{self.parameter}_{value:g}"


def load_sweep_spec(path):
    """Sweep spec from a JSON file: parameter, values, optional predicate
    and out_dir, and the base configuration either inline (``base_config``,
    key-value text) or by reference (``base_config_file``).  Relative paths
    resolve against the spec file's directory."""
    path = Path(path)
    raw = json.loads(path.read_text())
    if "base_config_file" in raw:
        ref = Path(raw["base_config_file"])
        if not ref.is_absolute():
            ref = path.parent / ref
        base = load_config(ref)
    else:
        base = parse_config(raw["base_config"])
    out_dir = raw.get("out_dir")
    if out_dir is not None and not Path(out_dir).is_absolute():
        out_dir = str(path.parent / out_dir)
    return SweepSpec(
        base=base,
        parameter=raw["parameter"],
        values=tuple(raw["values"]),
        predicate=raw.get("predicate", "no-blowup"),
        out_dir=out_dir,
    )


def _run_member(args):
    cfg, out = args
    solver.run(cfg, out)
    return out


def summarize_run(run_dir):
    """Per-run summary row, computed only from the run's persisted files."""
    run_dir = Path(run_dir)
    with open(run_dir / "summary.json") as fh:
        summ = json.load(fh)
    data = np.genfromtxt(run_dir / "diagnostics.csv", delimiter=",", names=True)
    data = np.atleast_1d(data)
    ts = np.asarray(data["t"], dtype=float)
    l2 = np.asarray(data["l2"], dtype=float)
    row = {
        "blowup": bool(summ["blowup"]),
        "blowup_time": summ["blowup_time"],
        "t_reached": float(summ["t_reached"]),
        "final_linf": float(summ["final_linf"]),
        "l2_slope": None,
    }
    if not row["blowup"]:
        keep = (ts >= 2.0) & (l2 > 0)
        if np.count_nonzero(keep) >= 5:
            slope, _ = fit_powerlaw(ts[keep], l2[keep])
            row["l2_slope"] = slope
    return row


def suppression_sweep(spec: SweepSpec, parallel=True, reuse_existing=False):
    """Run the sweep and aggregate a per-value summary table.

    Returns {"rows": [...], "first_success": value or None}; rows are
    sorted by swept value.  With ``reuse_existing`` a member whose
    diagnostics file is already present is not recomputed.
    """
    out = Path(spec.out_dir) if spec.out_dir is not None else None
    if out is None:
        raise ValueError("sweep requires an output directory")
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep_spec.json").write_text(
        json.dumps(
            {
                "parameter": spec.parameter,
                "values": list(spec.values),
                "predicate": spec.predicate,
                "code_version": code_version(),
                "base_config": dump_config(spec.base),
            },
            indent=1,
        )
    )
    jobs = []
    for v in spec.values:
        d = spec.member_dir(v)
        if reuse_existing and (d / "diagnostics.csv").exists():
            continue
        jobs.append((spec.member_config(v), str(d)))
    if jobs:
        if parallel and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=min(len(jobs), 4)) as pool:
                list(pool.map(_run_member, jobs))
        else:
            for job in jobs:
                _run_member(job)
    pred = PREDICATES[spec.predicate]
    rows = []
    first = None
    for v in spec.values:
        row = {"value": v}
        row.update(summarize_run(spec.member_dir(v)))
        rows.append(row)
        if first is None and pred(row):
            first = v
    _write_sweep_summary(out, spec, rows, first)
    return {"rows": rows, "first_success": first}


_SWEEP_COLUMNS = (
    "value", "blowup", "blowup_time", "t_reached", "final_linf", "l2_slope",
)


def _write_sweep_summary(out, spec, rows, first):
    with open(out / "sweep_summary.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(_SWEEP_COLUMNS)
        for r in rows:
            wr.writerow([
                r["value"], int(r["blowup"]),
                "" if r["blowup_time"] is None else r["blowup_time"],
                r["t_reached"], r["final_linf"],
                "" if r["l2_slope"] is None else r["l2_slope"],
            ])
    (out / "sweep_summary.json").write_text(
        json.dumps(
            {
                "parameter": spec.parameter,
                "predicate": spec.predicate,
                "code_version": code_version(),
                "first_success": first,
                "rows": rows,
            },
            indent=1,
        )
    )


# ---------------------------------------------------------------------------
# late-time decay fits


def _predicted_norms(cfg: SimConfig, ts):
    """Majorant norm curves amp(t) * f(t) * ||W(., t)||_p on the run's own
    grid, where f is the box-periodization peak factor: on a periodic box
    the solution is the image sum of the whole-space one, so the claimed
    envelope must be periodized before comparing decay rates."""
    p = EnvelopeParams(
        A=cfg.A, theta=cfg.theta, gamma=cfg.gamma,
        parabolic=bool(cfg.epsilon), Cstar=cfg.Cstar, C0=max(cfg.C0, 2.0),
    )
    axes = [
        -0.5 * L + (L / N) * np.arange(N)
        for L, N in zip(cfg.box, cfg.resolution)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    dV = math.prod(cfg.spacing)
    l2, linf = [], []
    for t in ts:
        if cfg.dims == 2:
            W = wave_scriptW_2d(mesh[0], mesh[1], t, p.C1prime, p.C1dblprime, cfg.A)
        else:
            W = wave_scriptW(mesh[0], mesh[1], mesh[2], t,
                             p.C1prime, p.C1dblprime, cfg.A)
        amp = float(envelope_A(t, p)) * periodization_factor(t, cfg.A, cfg.box, p)
        l2.append(amp * math.sqrt(float(np.sum(W * W)) * dV))
        linf.append(amp * float(np.max(W)))
    return np.array(l2), np.array(linf)


def decay_fit(run_dir, t_min=2.0, horizon=10.0, margin=0.3):
    """Late-time decay exponents of ||n||_2 and ||n||_inf vs the envelope.

    The run must have reached the horizon without blow-up.  Measured and
    predicted exponents are log-log slopes on t in [t_min, t_final];
    each measured slope must not exceed its prediction plus ``margin``
    (decay at least as fast as claimed).
    """
    run_dir = Path(run_dir)
    cfg = load_config(run_dir / "config.txt")
    with open(run_dir / "summary.json") as fh:
        summ = json.load(fh)
    if summ["blowup"]:
        raise ValueError("decay fit requires a run without blow-up")
    if summ["t_reached"] < horizon - 1e-9:
        raise ValueError(
            f"decay fit requires t >= {horizon:g}; run reached "
            f"{summ['t_reached']:g}"
        )
    data = np.genfromtxt(run_dir / "diagnostics.csv", delimiter=",", names=True)
    data = np.atleast_1d(data)
    ts = np.asarray(data["t"], dtype=float)
    keep = ts >= t_min
    if np.count_nonzero(keep) < 5:
        raise ValueError("insufficient samples past t_min for a fit")
    ts = ts[keep]
    pred2, predinf = _predicted_norms(cfg, ts)
    out = {"A": cfg.A, "window": [float(ts[0]), float(ts[-1])],
           "n_samples": int(len(ts)), "margin": margin}
    for p, col, pred in (("p2", "l2", pred2), ("pinf", "linf", predinf)):
        meas = np.asarray(data[col], dtype=float)[keep]
        m_slope, m_ci = fit_powerlaw(ts, meas)
        p_slope, _ = fit_powerlaw(ts, pred)
        out[p] = {
            "measured": m_slope,
            "ci": m_ci,
            "predicted": p_slope,
            "ok": bool(m_slope <= p_slope + margin),
        }
    return out


# ---------------------------------------------------------------------------
# elliptic vs parabolic chemoattractant comparison


def _c_envelope_amp(t, cfg: SimConfig):
    """Majorant amplitude for sup|c|: the density envelope directly for
    the elliptic model, with the extra late-time A^(1/2 - gamma/2)
    allowance in the parabolic one."""
    p = EnvelopeParams(
        A=cfg.A, theta=cfg.theta, gamma=cfg.gamma,
        parabolic=bool(cfg.epsilon), Cstar=cfg.Cstar, C0=max(cfg.C0, 2.0),
    )
    amp = float(envelope_A(t, p))
    if cfg.epsilon == 1 and cfg.A > 0:
        amp *= 1.0 + (cfg.A ** (0.5 - 0.5 * cfg.gamma) - 1.0) * float(chi(t))
    return amp


_COMPARE_COLUMNS = (
    "t", "linf_n_pe", "linf_n_pp", "linf_c_pe", "linf_c_pp",
    "c_ratio_pe", "c_ratio_pp", "n_gap",
)


def pp_vs_pe(cfg_pe: SimConfig, cfg_pp: SimConfig, out_dir=None):
    """Evolve matched elliptic (epsilon=0) and parabolic (epsilon=1)
    configurations side by side and record their sup-norm trajectories.

    The configs must differ only in epsilon and the initial
    chemoattractant scale; grids, shear, data and horizon must match.
    """
    if (cfg_pe.epsilon, cfg_pp.epsilon) != (0, 1):
        raise ValueError("expected an (epsilon=0, epsilon=1) pair")
    for name in ("dims", "box", "resolution", "A", "C0", "Cstar",
                 "init_shape", "init_center", "dt", "t_final"):
        if getattr(cfg_pe, name) != getattr(cfg_pp, name):
            raise ValueError(f"mismatched grids: configs differ in {name}")
    st_pe = solver.initial_state(cfg_pe)
    st_pp = solver.initial_state(cfg_pp)
    rows = []

    def record():
        t = st_pe.t
        c_pe = st_pe.n if not np.any(st_pe.n) else solver.elliptic_solve_c(
            st_pe.n_field(), A=cfg_pe.A, S=st_pe.S
        ).values
        c_pp = st_pp.c
        linf_c_pe = float(np.max(np.abs(c_pe)))
        linf_c_pp = float(np.max(np.abs(c_pp)))
        row = {
            "t": t,
            "linf_n_pe": float(np.max(np.abs(st_pe.n))),
            "linf_n_pp": float(np.max(np.abs(st_pp.n))),
            "linf_c_pe": linf_c_pe,
            "linf_c_pp": linf_c_pp,
            "c_ratio_pe": linf_c_pe / _c_envelope_amp(t, cfg_pe) if t > 0 else None,
            "c_ratio_pp": linf_c_pp / _c_envelope_amp(t, cfg_pp) if t > 0 else None,
            "n_gap": float(np.max(np.abs(st_pe.n - st_pp.n))),
        }
        rows.append(row)

    record()
    nsteps = int(round(cfg_pe.t_final / cfg_pe.dt))
    every = max(cfg_pe.diag_every, 1)
    for k in range(1, nsteps + 1):
        solver.step(st_pe, cfg_pe.dt)
        solver.step(st_pp, cfg_pp.dt)
        if st_pe.blowup or st_pp.blowup:
            break
        if k % every == 0 or k == nsteps:
            record()
    result = {
        "rows": rows,
        "blowup": bool(st_pe.blowup or st_pp.blowup),
        "warnings_pp": list(cfg_pp.warnings),
        "code_version": code_version(),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "comparison.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(_COMPARE_COLUMNS)
            for r in rows:
                wr.writerow([r[k] for k in _COMPARE_COLUMNS])
        meta = {k: v for k, v in result.items() if k != "rows"}
        meta["config_pe"] = dump_config(cfg_pe)
        meta["config_pp"] = dump_config(cfg_pp)
        (out / "comparison.json").write_text(json.dumps(meta, indent=1))
    return result
